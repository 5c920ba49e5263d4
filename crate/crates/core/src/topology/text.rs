//! Plain-text topology format, version 1.
//!
//! ```text
//! topology v1 <three-tier|spine-leaf>
//! <id> <role> [<leaf-tag>]          device
//! <id> -- <id>                      link
//! host <id> @ <device-id|->         host, `-` when detached
//! ```
//!
//! Blank lines and lines starting with `#` are ignored when parsing and
//! never emitted. The emitter writes the header, then devices, links and
//! hosts, each in topology order, one per line with `\n` endings, so
//! `emit(parse(emit(t))) == emit(t)` and `parse(emit(t)) == t`.

use std::fmt::Write;

use super::{Device, Fabric, Host, LeafTag, Role, Topology};
use crate::error::{Error, Result};

pub const HEADER: &str = "topology v1";

pub fn emit(t: &Topology) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER} {}", t.fabric().as_str());
    for d in t.devices() {
        match d.tag {
            Some(tag) => writeln!(out, "{} {} {}", d.id, d.role, tag.as_str()),
            None => writeln!(out, "{} {}", d.id, d.role),
        }
        .expect("writing to a String cannot fail");
    }
    for (a, b) in t.links() {
        let _ = writeln!(out, "{a} -- {b}");
    }
    for h in t.hosts() {
        let _ = writeln!(out, "host {} @ {}", h.id, h.attachment.as_deref().unwrap_or("-"));
    }
    out
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse(input: &str) -> Result<Topology> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, header) = lines.next().ok_or_else(|| parse_error(1, "empty topology"))?;
    let fabric: Fabric = header
        .strip_prefix(HEADER)
        .map(str::trim)
        .ok_or_else(|| parse_error(line_no, format!("expected `{HEADER} <kind>` header")))?
        .parse()
        .map_err(|e: String| parse_error(line_no, e))?;

    let mut devices = Vec::new();
    let mut links = Vec::new();
    let mut hosts = Vec::new();
    for (line_no, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["host", id, "@", dev] => hosts.push(Host {
                id: id.to_string(),
                attachment: (*dev != "-").then(|| dev.to_string()),
            }),
            [a, "--", b] => links.push((a.to_string(), b.to_string())),
            [id, role] | [id, role, _] => {
                let role: Role = role.parse().map_err(|e: String| parse_error(line_no, e))?;
                let tag = match tokens.get(2) {
                    Some(t) => Some(t.parse::<LeafTag>().map_err(|e| parse_error(line_no, e))?),
                    None => None,
                };
                devices.push(Device {
                    id: id.to_string(),
                    role,
                    tag,
                });
            }
            _ => return Err(parse_error(line_no, format!("unrecognized line `{line}`"))),
        }
    }
    Topology::from_parts(fabric, devices, links, hosts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_spine_leaf, build_three_tier, inject_failures};

    #[test]
    fn emits_expected_text() {
        let mut t = build_spine_leaf(1, 2, 1).unwrap();
        t.set_leaf_tag("l1", Some(LeafTag::Dmz)).unwrap();
        let text = emit(&t);
        assert_eq!(
            text,
            "topology v1 spine-leaf\ns0 spine\nl0 leaf\nl1 leaf dmz\ns0 -- l0\ns0 -- l1\nhost h0 @ l0\nhost h1 @ l1\n"
        );
        assert_eq!(parse(&text).unwrap(), t);
    }

    #[test]
    fn round_trips_detached_hosts() {
        let t = build_three_tier(2, 2, 2, 2).unwrap();
        let f = inject_failures(&t, ["a1", "c0"]).unwrap();
        let text = emit(&f);
        assert!(text.contains("host h2 @ -"));
        assert_eq!(parse(&text).unwrap(), f);
        assert_eq!(emit(&parse(&text).unwrap()), text);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# a tiny fabric\n\ntopology v1 spine-leaf\n s0 spine\nl0 leaf\n# link\ns0 -- l0\n";
        let t = parse(text).unwrap();
        assert_eq!(t.links().len(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse("topology v1 spine-leaf\ns0 spine\nl0 bogus\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse("").is_err());
        assert!(parse("topology v2 spine-leaf\n").is_err());
        assert!(parse("topology v1 mesh\n").is_err());
        assert!(matches!(
            parse("topology v1 spine-leaf\ns0 spine\ns0 -- l0 extra\n").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
        // structural invariants are enforced after parsing
        assert!(parse("topology v1 spine-leaf\ns0 spine\ns1 spine\ns0 -- s1\n").is_err());
        assert!(parse("topology v1 three-tier\nc0 core\nc1 core\nc2 core\nc0 -- c1\n").is_err());
        assert!(parse("topology v1 spine-leaf\ns0 spine\nhost h0 @ s0\n").is_err());
    }
}
