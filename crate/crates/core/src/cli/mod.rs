//! `fragrisk` command-line front end.
//!
//! Every subcommand resolves its parameters as flag > config file > default,
//! renders its results fully in memory, and only then writes files, so a
//! failing command leaves no partial output behind. Set `FRAGRISK_OUT_DIR`
//! to resolve relative output paths under another directory.

pub mod config;
pub mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::costing::compare_designs;
use crate::growth::{capacity_at, crossover, GrowthSpec, LinearGrowth, SigmoidGrowth};
use crate::harm::{survival_comparison, HarmParams};
use crate::oracle::exhaustive_failure_harm;
use crate::pareto::{
    below_conservative_threshold, degradation_curve, degradation_ratio, fragment_harm_density, mc_tail_mean, tail_mean,
};
use crate::report::{NumberFormat, ScenarioReport};
use crate::topology::{
    affected_fraction, failure_harm_mc, hop_histogram, inject_failures, text, Fabric, Role, Topology,
};
use config::{parse_list, OutputFormat, ScenarioConfig};

pub const OUT_DIR_ENV: &str = "FRAGRISK_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "fragrisk",
    version,
    about = "Fragmentation, heavy-tailed harm, and fabric fault domains"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario config file (flat `key = value` lines)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Fixed decimals for numbers (default: 17 significant digits in files, 6 decimals for scalars)
    #[arg(long, global = true)]
    pub digits: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write an SVG line chart (harm-curve, risk curve, growth)
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct HarmArgs {
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ParetoArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "L")]
    pub scale: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H(x) = -k x^beta for several beta values
    HarmCurve {
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 3.0])]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Fragmented vs whole harm, and the paired survival comparison
    Jensen {
        #[command(flatten)]
        harm: HarmArgs,
        #[command(flatten)]
        pareto: ParetoArgs,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        unit_value: Option<f64>,
    },
    /// Pareto error model and tail means
    Risk {
        #[command(subcommand)]
        command: RiskCommand,
    },
    /// Fabric construction and fault-domain analysis
    Topo {
        #[command(subcommand)]
        command: TopoCommand,
    },
    /// Sigmoid (modular) vs linear (fixed-port) capacity
    Growth {
        #[arg(long)]
        saturation: Option<f64>,
        #[arg(long)]
        ports_per_switch: Option<u32>,
        #[arg(long, default_value_t = 10.0)]
        max_units: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Price, power and fault-domain comparison of two fabrics
    Compare {
        /// Topology file for design a (default: configured 3-tier)
        #[arg(long)]
        a: Option<PathBuf>,
        /// Topology file for design b (default: configured spine-leaf)
        #[arg(long)]
        b: Option<PathBuf>,
        /// Port counts as role=count pairs, e.g. core=64,leaf=48
        #[arg(long, value_delimiter = ',')]
        ports: Vec<String>,
        #[arg(long)]
        modular_price_per_port: Option<f64>,
        #[arg(long)]
        modular_watts_per_port: Option<f64>,
        #[arg(long)]
        fixed_price_ratio: Option<f64>,
        #[arg(long)]
        fixed_watts_ratio: Option<f64>,
    },
    /// Run every analytic-vs-reference check
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum RiskCommand {
    /// Density of the per-fragment harm at xi
    Density {
        #[command(flatten)]
        harm: HarmArgs,
        #[command(flatten)]
        pareto: ParetoArgs,
        #[arg(long = "N")]
        fragments: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
    },
    /// Closed-form tail mean, optionally with its Monte Carlo estimate
    TailMean {
        #[command(flatten)]
        harm: HarmArgs,
        #[command(flatten)]
        pareto: ParetoArgs,
        #[arg(long = "N")]
        fragments: Option<u64>,
        #[arg(long)]
        mc: bool,
    },
    /// Degradation ratio K^(alpha (1/beta - 1))
    Ratio {
        #[command(flatten)]
        harm: HarmArgs,
        #[command(flatten)]
        pareto: ParetoArgs,
        #[arg(long = "K")]
        multiplier: f64,
        #[arg(long = "N")]
        fragments: Option<u64>,
    },
    /// Degradation ratio over a range of K (alpha defaults to 2)
    Curve {
        #[command(flatten)]
        harm: HarmArgs,
        #[command(flatten)]
        pareto: ParetoArgs,
        /// Comma-separated K values (default 1..=16)
        #[arg(long = "K-values", value_delimiter = ',')]
        multipliers: Vec<f64>,
    },
}

#[derive(Debug, Args, Default)]
pub struct TopologyArgs {
    /// Read the topology from this file (`-` for stdin) instead of building one
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub cores: Option<usize>,
    #[arg(long)]
    pub distributions: Option<usize>,
    #[arg(long)]
    pub access_per_distribution: Option<usize>,
    #[arg(long)]
    pub hosts_per_access: Option<usize>,
    #[arg(long)]
    pub dual_homed: bool,
    #[arg(long)]
    pub spines: Option<usize>,
    #[arg(long)]
    pub leaves: Option<usize>,
    #[arg(long)]
    pub hosts_per_leaf: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum TopoCommand {
    /// Emit a topology in the text format
    Build {
        #[command(flatten)]
        topo: TopologyArgs,
    },
    /// Histogram of host-pair hop counts
    Hops {
        #[command(flatten)]
        topo: TopologyArgs,
    },
    /// Fail devices and report the affected fraction of host pairs
    Fail {
        #[command(flatten)]
        topo: TopologyArgs,
        /// Comma-separated device ids
        #[arg(long, value_delimiter = ',', required = true)]
        fail: Vec<String>,
        /// Also write the damaged topology here
        #[arg(long)]
        emit_topology: Option<PathBuf>,
    },
    /// Monte Carlo harm of random device failures
    Harm {
        #[command(flatten)]
        topo: TopologyArgs,
        #[command(flatten)]
        harm: HarmArgs,
        /// Failure probability for every role
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        p_core: Option<f64>,
        #[arg(long)]
        p_distribution: Option<f64>,
        #[arg(long)]
        p_access: Option<f64>,
        #[arg(long)]
        p_spine: Option<f64>,
        #[arg(long)]
        p_leaf: Option<f64>,
        /// Silent packet drop probability per core device, carried in the report
        #[arg(long)]
        silent_drop: Option<f64>,
        /// Add the exhaustive-enumeration expectation (at most 20 devices)
        #[arg(long)]
        exact: bool,
    },
}

/// Everything a command produces, written only after it succeeded.
#[derive(Debug, Default)]
struct Outputs {
    stdout: String,
    files: Vec<(PathBuf, String)>,
}

struct Context_ {
    cfg: ScenarioConfig,
    file_keys: BTreeSet<String>,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
    digits_given: bool,
}

impl Context_ {
    fn number_format(&self) -> NumberFormat {
        self.cfg.digits.map_or(NumberFormat::RoundTrip, NumberFormat::Decimals)
    }

    fn scalar(&self, v: f64) -> String {
        NumberFormat::Decimals(self.cfg.digits.unwrap_or(6)).format(v)
    }

    fn stamp(&self, report: &mut ScenarioReport, seeded: bool) {
        report.set_config_hash(self.cfg.hash());
        if seeded {
            report.set_seed(self.cfg.seed);
        }
    }

    fn render(&self, report: &ScenarioReport) -> String {
        match self.cfg.format {
            OutputFormat::Csv => report.to_csv(self.number_format()),
            OutputFormat::Json => report.to_json(),
        }
    }

    /// Report to `--out`, or to stdout when no file was requested.
    fn emit_table(&self, outputs: &mut Outputs, report: &ScenarioReport) {
        let rendered = self.render(report);
        match &self.out {
            Some(path) => outputs.files.push((path.clone(), rendered)),
            None => outputs.stdout.push_str(&rendered),
        }
    }

    /// Scalar lines on stdout; the full report only with `--out`.
    fn emit_scalar(&self, outputs: &mut Outputs, report: &ScenarioReport, values: &[f64]) {
        for &v in values {
            outputs.stdout.push_str(&self.scalar(v));
            outputs.stdout.push('\n');
        }
        if let Some(path) = &self.out {
            outputs.files.push((path.clone(), self.render(report)));
        }
    }

    fn emit_svg(&self, outputs: &mut Outputs, report: &ScenarioReport, title: &str) {
        if let Some(path) = &self.svg {
            outputs.files.push((path.clone(), report.to_svg(title)));
        }
    }

    /// Modular cores may drop packets without reporting it; the probability
    /// is recorded alongside any topology that has cores.
    fn annotate_silent_drop(&self, report: &mut ScenarioReport, t: &Topology) {
        if let Some(p) = self.cfg.core_silent_drop {
            if t.count_role(Role::Core) > 0 {
                report.set_meta("core_silent_drop_probability", p);
                report.set_meta("core_devices", t.count_role(Role::Core));
            }
        }
    }

    fn apply_harm(&mut self, args: &HarmArgs) {
        if let Some(k) = args.k {
            self.cfg.harm_k = k;
        }
        if let Some(beta) = args.beta {
            self.cfg.harm_beta = beta;
        }
    }

    fn apply_pareto(&mut self, args: &ParetoArgs) {
        if let Some(alpha) = args.alpha {
            self.cfg.pareto_alpha = alpha;
        }
        if let Some(scale) = args.scale {
            self.cfg.pareto_scale = scale;
        }
    }

    fn apply_topology(&mut self, args: &TopologyArgs) -> Result<()> {
        let t = &mut self.cfg.topology;
        if let Some(kind) = &args.kind {
            t.kind = kind.parse().map_err(|e: String| anyhow!(e))?;
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = args.$field { t.$field = v; } )* };
        }
        take!(
            cores,
            distributions,
            access_per_distribution,
            hosts_per_access,
            spines,
            leaves,
            hosts_per_leaf
        );
        if args.dual_homed {
            t.dual_homed = true;
        }
        Ok(())
    }

    fn topology(&mut self, args: &TopologyArgs) -> Result<Topology> {
        self.apply_topology(args)?;
        match &args.topology {
            Some(path) => Ok(text::parse(&read_input(path)?)?),
            None => Ok(self.cfg.topology.build()?),
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn linspace(hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect(),
    }
}

fn parse_ports(specs: &[String]) -> Result<BTreeMap<Role, u32>> {
    specs
        .iter()
        .map(|s| {
            let (role, n) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("expected role=count, got `{s}`"))?;
            let role: Role = role.trim().parse().map_err(|e: String| anyhow!(e))?;
            let n: u32 = n.trim().parse().with_context(|| format!("port count in `{s}`"))?;
            Ok((role, n))
        })
        .collect()
}

fn run_command(ctx: &mut Context_, command: &Command) -> Result<(Outputs, i32)> {
    let mut out = Outputs::default();
    let mut code = 0;
    match command {
        Command::HarmCurve {
            k,
            betas,
            x_max,
            points,
        } => {
            if let Some(k) = k {
                ctx.cfg.harm_k = *k;
            }
            if betas.is_empty() || *points == 0 {
                bail!("need at least one beta and one point");
            }
            let params: Vec<HarmParams> = betas
                .iter()
                .map(|&b| HarmParams::new(ctx.cfg.harm_k, b))
                .collect::<crate::Result<_>>()?;
            let xs = linspace(*x_max, *points);
            let columns = std::iter::once("x".to_string()).chain(betas.iter().map(|b| format!("H_beta={b}")));
            let mut report = ScenarioReport::new("harm-curve", columns);
            report.set_meta("k", ctx.cfg.harm_k);
            for x in xs {
                let mut row = vec![x];
                for p in &params {
                    row.push(p.harm(x)?);
                }
                report.push_row(row);
            }
            ctx.stamp(&mut report, false);
            ctx.emit_table(&mut out, &report);
            ctx.emit_svg(&mut out, &report, "Harm H(x) = -k x^beta");
        }
        Command::Jensen {
            harm,
            pareto,
            weights,
            x,
            unit_value,
        } => {
            ctx.apply_harm(harm);
            ctx.apply_pareto(pareto);
            if let Some(w) = weights {
                ctx.cfg.weights = parse_list(w)?;
            }
            if let Some(x) = x {
                ctx.cfg.jensen_x = *x;
            }
            if let Some(b) = unit_value {
                ctx.cfg.unit_value = *b;
            }
            let h = ctx.cfg.harm()?;
            let w = ctx.cfg.weights()?;
            let p = ctx.cfg.pareto()?;
            let x = ctx.cfg.jensen_x;
            let survival = survival_comparison(&h, ctx.cfg.unit_value, &w, &p, ctx.cfg.trials, ctx.cfg.seed)?;
            let mut report = ScenarioReport::new("jensen", ["value"]).with_label_column("quantity");
            report.push_labeled_row("harm", vec![h.harm(x)?]);
            report.push_labeled_row("fragmented_harm", vec![h.fragmented_harm(&w, x)?]);
            report.push_labeled_row("jensen_gap", vec![h.jensen_gap(&w, x)?]);
            report.push_labeled_row(
                "guarantees_fragmentation_benefit",
                vec![f64::from(u8::from(h.guarantees_fragmentation_benefit()))],
            );
            report.push_labeled_row("centralized_mean", vec![survival.centralized_mean]);
            report.push_labeled_row("decentralized_mean", vec![survival.decentralized_mean]);
            report.push_labeled_row("difference", vec![survival.difference()]);
            report.push_labeled_row("difference_std_error", vec![survival.difference_std_error]);
            report.set_meta("trials", ctx.cfg.trials);
            ctx.stamp(&mut report, true);
            ctx.emit_table(&mut out, &report);
        }
        Command::Risk { command } => run_risk(ctx, command, &mut out)?,
        Command::Topo { command } => run_topo(ctx, command, &mut out)?,
        Command::Growth {
            saturation,
            ports_per_switch,
            max_units,
            points,
        } => {
            if let Some(s) = saturation {
                ctx.cfg.growth_saturation = *s;
            }
            if let Some(p) = ports_per_switch {
                ctx.cfg.growth_ports_per_switch = *p;
            }
            let sig = SigmoidGrowth::new(ctx.cfg.growth_saturation)?;
            let lin = LinearGrowth::new(ctx.cfg.growth_ports_per_switch)?;
            let mut report = ScenarioReport::new("growth", ["units", "sigmoid", "linear"]);
            for u in linspace(*max_units, *points) {
                report.push_row(vec![
                    u,
                    capacity_at(&GrowthSpec::from(sig), u)?,
                    capacity_at(&GrowthSpec::from(lin), u)?,
                ]);
            }
            report.set_meta("saturation_capacity", sig.saturation_capacity());
            report.set_meta("ports_per_switch", lin.ports_per_switch());
            report.set_meta("crossover_units", format!("{:?}", crossover(&sig, &lin)));
            ctx.stamp(&mut report, false);
            ctx.emit_table(&mut out, &report);
            ctx.emit_svg(&mut out, &report, "Capacity: modular (erf) vs fixed-port (linear)");
        }
        Command::Compare {
            a,
            b,
            ports,
            modular_price_per_port,
            modular_watts_per_port,
            fixed_price_ratio,
            fixed_watts_ratio,
        } => {
            let c = &mut ctx.cfg.cost;
            macro_rules! take {
                ($($field:ident),*) => { $( if let Some(v) = $field { c.$field = *v; } )* };
            }
            take!(
                modular_price_per_port,
                modular_watts_per_port,
                fixed_price_ratio,
                fixed_watts_ratio
            );
            ctx.cfg.ports.extend(parse_ports(ports)?);
            let load = |path: &Option<PathBuf>, kind: Fabric, cfg: &ScenarioConfig| -> Result<Topology> {
                match path {
                    Some(p) => Ok(text::parse(&read_input(p)?)?),
                    None => {
                        let mut spec = cfg.topology.clone();
                        spec.kind = kind;
                        Ok(spec.build()?)
                    }
                }
            };
            let ta = load(a, Fabric::ThreeTier, &ctx.cfg)?;
            let tb = load(b, Fabric::SpineLeaf, &ctx.cfg)?;
            let mut report = compare_designs(&ta, &tb, &ctx.cfg.cost, &ctx.cfg.ports)?;
            report.set_meta("a", ta.fabric().as_str());
            report.set_meta("b", tb.fabric().as_str());
            ctx.annotate_silent_drop(&mut report, &ta);
            ctx.stamp(&mut report, false);
            ctx.emit_table(&mut out, &report);
        }
        Command::Verify => {
            let checks = verify::run_all();
            let mut report = ScenarioReport::new("verify", ["value", "tolerance", "passed"]).with_label_column("check");
            for c in &checks {
                out.stdout.push_str(&c.line());
                out.stdout.push('\n');
                report.push_labeled_row(
                    c.name.replace(',', ";"),
                    vec![c.value, c.tolerance, f64::from(u8::from(c.passed))],
                );
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            out.stdout.push_str(&format!(
                "{} checks, {} passed, {} failed\n",
                checks.len(),
                checks.len() - failed,
                failed
            ));
            if let Some(path) = &ctx.out {
                ctx.stamp(&mut report, false);
                out.files.push((path.clone(), ctx.render(&report)));
            }
            code = i32::from(failed > 0);
        }
    }
    Ok((out, code))
}

fn run_risk(ctx: &mut Context_, command: &RiskCommand, out: &mut Outputs) -> Result<()> {
    let set_n = |ctx: &mut Context_, n: &Option<u64>| {
        if let Some(n) = n {
            ctx.cfg.fragments = *n;
        }
    };
    match command {
        RiskCommand::Density {
            harm,
            pareto,
            fragments,
            xi,
        } => {
            ctx.apply_harm(harm);
            ctx.apply_pareto(pareto);
            set_n(ctx, fragments);
            let g = fragment_harm_density(&ctx.cfg.pareto()?, &ctx.cfg.harm()?, ctx.cfg.fragment_count()?, *xi)?;
            let mut report = ScenarioReport::new("risk density", ["xi", "density"]);
            report.push_row(vec![*xi, g]);
            ctx.stamp(&mut report, false);
            ctx.emit_scalar(out, &report, &[g]);
        }
        RiskCommand::TailMean {
            harm,
            pareto,
            fragments,
            mc,
        } => {
            ctx.apply_harm(harm);
            ctx.apply_pareto(pareto);
            set_n(ctx, fragments);
            let (p, h, n) = (ctx.cfg.pareto()?, ctx.cfg.harm()?, ctx.cfg.fragment_count()?);
            let exact = tail_mean(&p, &h, n)?;
            if below_conservative_threshold(&p, &h) {
                eprintln!(
                    "warning: alpha = {} is at most 1 + beta = {}; the tail mean converges but the sampling variance does not",
                    p.alpha(),
                    1.0 + h.beta()
                );
            }
            let mut values = vec![exact];
            let mut columns = vec!["N", "closed_form"];
            let mut row = vec![n.get() as f64, exact];
            if *mc {
                let est = mc_tail_mean(&p, &h, n, ctx.cfg.trials, ctx.cfg.seed)?;
                values.push(est.mean);
                columns.extend(["mc_mean", "mc_std_error", "relative_error"]);
                row.extend([est.mean, est.std_error, ((est.mean - exact) / exact).abs()]);
            }
            let mut report = ScenarioReport::new("risk tail-mean", columns);
            report.push_row(row);
            ctx.stamp(&mut report, *mc);
            ctx.emit_scalar(out, &report, &values);
        }
        RiskCommand::Ratio {
            harm,
            pareto,
            multiplier,
            fragments,
        } => {
            ctx.apply_harm(harm);
            ctx.apply_pareto(pareto);
            set_n(ctx, fragments);
            let r = degradation_ratio(
                &ctx.cfg.pareto()?,
                &ctx.cfg.harm()?,
                *multiplier,
                ctx.cfg.fragment_count()?,
            )?;
            let mut report = ScenarioReport::new("risk ratio", ["K", "ratio"]);
            report.push_row(vec![*multiplier, r]);
            ctx.stamp(&mut report, false);
            ctx.emit_scalar(out, &report, &[r]);
        }
        RiskCommand::Curve {
            harm,
            pareto,
            multipliers,
        } => {
            // the degradation figure is drawn at alpha = 2 unless told otherwise
            if !ctx.file_keys.contains("pareto.alpha") {
                ctx.cfg.pareto_alpha = 2.0;
            }
            ctx.apply_harm(harm);
            ctx.apply_pareto(pareto);
            let ks: Vec<f64> = if multipliers.is_empty() {
                (1..=16).map(f64::from).collect()
            } else {
                multipliers.clone()
            };
            let (p, h) = (ctx.cfg.pareto()?, ctx.cfg.harm()?);
            let mut report = ScenarioReport::new("risk curve", ["K", "ratio"]);
            for (k, r) in degradation_curve(&p, &h, &ks)? {
                report.push_row(vec![k, r]);
            }
            report.set_meta("alpha", p.alpha());
            report.set_meta("beta", h.beta());
            ctx.stamp(&mut report, false);
            ctx.emit_table(out, &report);
            ctx.emit_svg(out, &report, "Degradation K M(KN) / M(N)");
        }
    }
    Ok(())
}

fn run_topo(ctx: &mut Context_, command: &TopoCommand, out: &mut Outputs) -> Result<()> {
    match command {
        TopoCommand::Build { topo } => {
            let t = ctx.topology(topo)?;
            let rendered = text::emit(&t);
            match &ctx.out {
                Some(path) => out.files.push((path.clone(), rendered)),
                None => out.stdout.push_str(&rendered),
            }
        }
        TopoCommand::Hops { topo } => {
            let t = ctx.topology(topo)?;
            let mut report = ScenarioReport::new("topo hops", ["pairs"]).with_label_column("hops");
            for (bucket, count) in hop_histogram(&t) {
                report.push_labeled_row(bucket.to_string(), vec![count as f64]);
            }
            report.set_meta("fabric", t.fabric().as_str());
            ctx.stamp(&mut report, false);
            let mut rendered_digits = ctx.cfg.digits;
            // pair counts are integers; print them as such unless asked otherwise
            if !ctx.digits_given {
                rendered_digits = Some(0);
            }
            let saved = std::mem::replace(&mut ctx.cfg.digits, rendered_digits);
            ctx.emit_table(out, &report);
            ctx.cfg.digits = saved;
        }
        TopoCommand::Fail {
            topo,
            fail,
            emit_topology,
        } => {
            let t = ctx.topology(topo)?;
            let ids: Vec<&str> = fail.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
            let damaged = inject_failures(&t, ids.iter().copied())?;
            let fraction = affected_fraction(&t, ids.iter().copied())?;
            let mut report = ScenarioReport::new("topo fail", ["failed_devices", "affected_fraction"]);
            report.push_row(vec![ids.len() as f64, fraction]);
            report.set_meta("failed", ids.join(" "));
            ctx.stamp(&mut report, false);
            ctx.emit_scalar(out, &report, &[fraction]);
            if let Some(path) = emit_topology {
                out.files.push((path.clone(), text::emit(&damaged)));
            }
        }
        TopoCommand::Harm {
            topo,
            harm,
            p,
            p_core,
            p_distribution,
            p_access,
            p_spine,
            p_leaf,
            silent_drop,
            exact,
        } => {
            ctx.apply_harm(harm);
            if let Some(p) = p {
                for role in Role::ALL {
                    ctx.cfg.failure.insert(role, *p);
                }
            }
            for (role, value) in [
                (Role::Core, p_core),
                (Role::Distribution, p_distribution),
                (Role::Access, p_access),
                (Role::Spine, p_spine),
                (Role::Leaf, p_leaf),
            ] {
                if let Some(v) = value {
                    ctx.cfg.failure.insert(role, *v);
                }
            }
            if let Some(d) = silent_drop {
                if !(0.0..=1.0).contains(d) {
                    bail!("--silent-drop must lie in [0, 1]");
                }
                ctx.cfg.core_silent_drop = Some(*d);
            }
            let t = ctx.topology(topo)?;
            let (fm, h) = (ctx.cfg.failure_model()?, ctx.cfg.harm()?);
            let r = failure_harm_mc(&t, &fm, &h, ctx.cfg.trials, ctx.cfg.seed)?;
            let mut report = ScenarioReport::new("topo harm", ["value"]).with_label_column("statistic");
            report.push_labeled_row("expected_harm", vec![r.expected_harm]);
            report.push_labeled_row("std_error", vec![r.std_error]);
            report.push_labeled_row("p50", vec![r.quantiles.p50]);
            report.push_labeled_row("p90", vec![r.quantiles.p90]);
            report.push_labeled_row("p99", vec![r.quantiles.p99]);
            if *exact {
                report.push_labeled_row("exact_expected_harm", vec![exhaustive_failure_harm(&t, &fm, &h)?]);
            }
            report.set_meta("fabric", t.fabric().as_str());
            report.set_meta("trials", ctx.cfg.trials);
            ctx.annotate_silent_drop(&mut report, &t);
            ctx.stamp(&mut report, true);
            ctx.emit_table(out, &report);
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code, the captured stdout, and writes files.
pub fn run<I, T>(args: I) -> Result<(i32, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let g = &cli.global;
    let (mut cfg, file_keys) = match &g.config {
        Some(path) => {
            ScenarioConfig::load(&read_input(path)?).with_context(|| format!("loading config {}", path.display()))?
        }
        None => (ScenarioConfig::default(), BTreeSet::new()),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = g.trials {
        if trials == 0 {
            bail!("--trials must be at least 1");
        }
        cfg.trials = trials;
    }
    if let Some(format) = &g.format {
        cfg.format = format.parse()?;
    }
    if let Some(d) = g.digits {
        cfg.digits = Some(d);
    }
    let digits_given = cfg.digits.is_some();
    let mut ctx = Context_ {
        cfg,
        file_keys,
        out: g.out.as_deref().map(resolve_output),
        svg: g.svg.as_deref().map(resolve_output),
        digits_given,
    };
    let (outputs, code) = run_command(&mut ctx, &cli.command)?;
    for (path, contents) in &outputs.files {
        write_atomically(path, contents)?;
    }
    Ok((code, outputs.stdout))
}

/// Entry point for the binary: runs, prints, and maps errors to exit codes.
pub fn main() -> i32 {
    match run(std::env::args_os()) {
        Ok((code, stdout)) => {
            let mut lock = std::io::stdout().lock();
            if lock.write_all(stdout.as_bytes()).and_then(|_| lock.flush()).is_err() {
                return 1;
            }
            code
        }
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return if clap_err.use_stderr() { 2 } else { 0 };
            }
            eprintln!("error: {err:#}");
            1
        }
    }
}
