mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use eulerian::estimator::{eo_estimate, log_count, EstimateOptions, SchrijverBounds};
use eulerian::exact::{
    eo_count_bruteforce, eulerian_digraph_count_bruteforce, eulerian_oriented_count_bruteforce, rt_count, DIGRAPH_MAX_N,
};
use eulerian::expansion::{evaluate_expansion, expansion_series_for, ExpansionOptions, Family, WeightSpec};
use eulerian::hp::DEFAULT_BITS;
use eulerian::taillab::{check_tail_theorem, TailInstance};
use eulerian::{rational, Error, Graph, Result};

use output::{Envelope, Format};

#[derive(Parser, Debug)]
#[command(name = "eulerian", version, about = "Exact counts and cumulant expansions for Eulerian orientations")]
struct Cli {
    /// Output format; JSON is canonical.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Working precision in bits for floating-point results.
    #[arg(long, global = true, env = "EULERIAN_BITS", default_value_t = DEFAULT_BITS)]
    bits: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact counts: regular tournaments, Eulerian orientations, Eulerian digraphs or oriented graphs.
    Exact {
        #[arg(value_enum)]
        subject: Subject,
        /// Number of vertices (rt, ed, eog; for eo it means the complete graph).
        #[arg(long)]
        n: Option<usize>,
        /// Graph file for eo.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Exact rational coefficients of the exponent series in 1/n.
    Expand {
        family: String,
        /// Number of coefficients.
        #[arg(long)]
        order: usize,
        /// Evaluate the expansion at this n.
        #[arg(long)]
        eval: Option<u64>,
        /// Constant part of the edge weight, custom family only.
        #[arg(long, requires = "b")]
        a: Option<String>,
        /// Cosine part of the edge weight, custom family only.
        #[arg(long, requires = "a")]
        b: Option<String>,
    },
    /// Cumulant-corrected estimate of the number of Eulerian orientations.
    Estimate {
        #[arg(long)]
        graph: PathBuf,
        /// Number of cumulant corrections (0..=2).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Taylor terms of the log weight.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Covariance parameter, as a rational; defaults to 2d/n.
        #[arg(long)]
        w: Option<String>,
    },
    /// Schrijver lower and upper bounds.
    Bounds {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Exhaustive check of the cumulant tail bound on an instance file.
    Taillab {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        m: usize,
    },
    /// Spanning-tree count, Cheeger constant and degrees.
    Graphinfo {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Subject {
    Rt,
    Eo,
    Ed,
    Eog,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Invalid(_) => 2,
        Error::SizeLimit(_) => 3,
        Error::Io(_) => 4,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::SizeLimit(_) => "size",
        Error::Invalid(_) => "invalid",
        Error::Io(_) => "io",
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Graph::parse(&read(path)?)
}

fn graph_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn digits(bits: usize) -> usize {
    ((bits as f64 * std::f64::consts::LOG10_2) as usize).saturating_sub(2).max(1)
}

fn need_n(n: Option<usize>, subject: &str) -> Result<usize> {
    n.ok_or_else(|| Error::Invalid(format!("exact {subject} needs --n")))
}

fn cmd_exact(subject: Subject, n: Option<usize>, graph: Option<&Path>) -> Result<(Value, Value)> {
    match subject {
        Subject::Rt => {
            let n = need_n(n, "rt")?;
            let v = rt_count(n)?;
            Ok((json!({ "n": n }), json!({ "value": v.to_string(), "method": "dp" })))
        }
        Subject::Eo => {
            let (g, inputs) = match (graph, n) {
                (Some(p), _) => {
                    let g = load_graph(p)?;
                    let inputs = json!({ "graph": p.display().to_string(), "n": g.n(), "edges": g.num_edges() });
                    (g, inputs)
                }
                (None, Some(n)) => (Graph::complete(n), json!({ "complete": n })),
                (None, None) => return Err(Error::Invalid("exact eo needs --graph or --n".into())),
            };
            if !g.all_degrees_even() {
                return Err(Error::Domain("Eulerian orientations need every degree even".into()));
            }
            let v = eo_count_bruteforce(&g)?;
            Ok((inputs, json!({ "value": v.to_string(), "method": "bruteforce" })))
        }
        Subject::Ed => {
            let n = need_n(n, "ed")?;
            let v = eulerian_digraph_count_bruteforce(n)?;
            Ok((json!({ "n": n }), json!({ "value": v.to_string(), "method": "bruteforce" })))
        }
        Subject::Eog => {
            let n = need_n(n, "eog")?;
            let v = eulerian_oriented_count_bruteforce(n)?;
            Ok((json!({ "n": n }), json!({ "value": v.to_string(), "method": "bruteforce" })))
        }
    }
}

/// Published regular-tournament counts, `n value` per line, odd `n <= 37`.
const RT_TABLE: &str = include_str!("../data/rt_table.txt");

fn rt_table(n: usize) -> Option<BigInt> {
    RT_TABLE.lines().find_map(|l| {
        let (k, v) = l.split_once(' ')?;
        (k.parse::<usize>().ok()? == n).then(|| v.trim().parse().ok())?
    })
}

/// Exact count to compare an evaluated expansion against, when one is known or cheap.
fn exact_for(family: Family, n: u64) -> Result<Option<BigInt>> {
    let n = n as usize;
    match family {
        Family::Rt => Ok(rt_table(n)),
        Family::Ed if n <= DIGRAPH_MAX_N => eulerian_digraph_count_bruteforce(n).map(Some),
        Family::Eog if n <= DIGRAPH_MAX_N => eulerian_oriented_count_bruteforce(n).map(Some),
        _ => Ok(None),
    }
}

fn cmd_expand(
    family: &str,
    order: usize,
    eval: Option<u64>,
    ab: Option<(&str, &str)>,
    bits: usize,
) -> Result<(Value, Value)> {
    let fam: Family = family.parse()?;
    let weight = match (fam, ab) {
        (Family::Custom, Some((a, b))) => WeightSpec::new(rational::parse(a)?, rational::parse(b)?)?,
        (Family::Custom, None) => return Err(Error::Invalid("custom family needs --a and --b".into())),
        (_, Some(_)) => return Err(Error::Invalid("--a/--b apply to the custom family only".into())),
        (f, None) => WeightSpec::family(f),
    };
    let res = expansion_series_for(&weight, order, ExpansionOptions::default())?;
    let mut inputs = json!({ "family": fam.name(), "order": order });
    if fam == Family::Custom {
        inputs["a"] = rational::to_string(&weight.a).into();
        inputs["b"] = rational::to_string(&weight.b).into();
    }
    let mut result = res.to_json();
    result["family"] = fam.name().into();
    result["order"] = order.into();
    result["variance"] = rational::to_string(&res.variance).into();
    if let Some(n) = eval {
        inputs["eval"] = n.into();
        let (value, log) = evaluate_expansion(&res, n, bits)?;
        let d = digits(bits);
        let mut ev = json!({
            "n": n,
            "value": value.to_decimal(d),
            "log_value": log.to_decimal(d),
            "exact": Value::Null,
            "log_ratio": Value::Null,
        });
        if let Some(exact) = exact_for(fam, n)? {
            if exact > BigInt::from(0) {
                let ratio = log_count(&exact, bits)? - log;
                ev["exact"] = exact.to_string().into();
                ev["log_ratio"] = ratio.to_decimal(d).into();
            }
        }
        result["eval"] = ev;
    }
    Ok((inputs, result))
}

fn cmd_estimate(path: &Path, m: usize, k: usize, w: Option<&str>, bits: usize) -> Result<(Value, Value)> {
    let g = load_graph(path)?;
    let w = w.map(rational::parse).transpose()?;
    let mut inputs = json!({ "graph": path.display().to_string(), "m": m, "k": k });
    if let Some(w) = &w {
        inputs["w"] = rational::to_string(w).into();
    }
    let opts = EstimateOptions { m, k, w, bits };
    let report = eo_estimate(&g, &graph_id(path), &opts)?;
    Ok((inputs, report.to_json()))
}

fn cmd_bounds(path: &Path, bits: usize) -> Result<(Value, Value)> {
    let g = load_graph(path)?;
    let b = SchrijverBounds::new(&g)?;
    let d = digits(bits);
    let (lo, hi) = (b.log_lower(bits), b.log_upper(bits));
    let result = json!({
        "lower": rational::to_string(&b.lower),
        "upper_squared": b.upper_squared.to_string(),
        "lower_decimal": lo.exp().to_decimal(d),
        "upper_decimal": hi.exp().to_decimal(d),
        "log_lower": lo.to_decimal(d),
        "log_upper": hi.to_decimal(d),
    });
    Ok((json!({ "graph": path.display().to_string(), "n": g.n(), "edges": g.num_edges() }), result))
}

fn cmd_taillab(path: &Path, m: usize, bits: usize) -> Result<(Value, Value)> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("instance JSON: {e}")))?;
    let inst = TailInstance::from_json(&v)?;
    let report = check_tail_theorem(&inst.space, &inst.f, m, bits)?;
    Ok((json!({ "instance": path.display().to_string(), "m": m }), report.to_json()))
}

fn cmd_graphinfo(path: &Path) -> Result<(Value, Value)> {
    let g = load_graph(path)?;
    // Beyond the scan limit the Cheeger fields are left null rather than failing.
    let cheeger = |r: Result<num_rational::BigRational>| match r {
        Ok(h) => Ok(Value::String(rational::to_string(&h))),
        Err(Error::SizeLimit(_)) | Err(Error::Domain(_)) => Ok(Value::Null),
        Err(e) => Err(e),
    };
    let result = json!({
        "n": g.n(),
        "edges": g.num_edges(),
        "degrees": g.degrees(),
        "min_degree": g.min_degree(),
        "max_degree": g.max_degree(),
        "regular": g.is_regular(),
        "all_degrees_even": g.all_degrees_even(),
        "connected": g.is_connected(),
        "tau": g.spanning_tree_count().to_string(),
        "cheeger": cheeger(g.cheeger_constant())?,
        "cheeger_ratio": cheeger(g.cheeger_ratio())?,
    });
    Ok((json!({ "graph": path.display().to_string() }), result))
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Exact { subject, .. } => {
            let s = subject.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            format!("exact {s}")
        }
        Command::Expand { .. } => "expand".into(),
        Command::Estimate { .. } => "estimate".into(),
        Command::Bounds { .. } => "bounds".into(),
        Command::Taillab { .. } => "taillab".into(),
        Command::Graphinfo { .. } => "graphinfo".into(),
    }
}

/// Runs the command; the last value is the precision used by float payloads.
fn dispatch(cli: &Cli) -> Result<(Value, Value, Option<usize>)> {
    let bits = cli.bits;
    let (inputs, result, hp) = match &cli.command {
        Command::Exact { subject, n, graph } => {
            let (i, r) = cmd_exact(*subject, *n, graph.as_deref())?;
            (i, r, false)
        }
        Command::Expand { family, order, eval, a, b } => {
            let ab = a.as_deref().zip(b.as_deref());
            let (i, r) = cmd_expand(family, *order, *eval, ab, bits)?;
            (i, r, eval.is_some())
        }
        Command::Estimate { graph, m, k, w } => {
            let (i, r) = cmd_estimate(graph, *m, *k, w.as_deref(), bits)?;
            (i, r, true)
        }
        Command::Bounds { graph } => {
            let (i, r) = cmd_bounds(graph, bits)?;
            (i, r, true)
        }
        Command::Taillab { instance, m } => {
            let (i, r) = cmd_taillab(instance, *m, bits)?;
            (i, r, true)
        }
        Command::Graphinfo { graph } => {
            let (i, r) = cmd_graphinfo(graph)?;
            (i, r, false)
        }
    };
    Ok((inputs, result, hp.then_some(bits)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = command_name(&cli.command);
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(4);
        }
    }
    if cli.bits < 64 {
        let e = Error::Invalid(format!("--bits must be at least 64, got {}", cli.bits));
        output::emit_error(cli.format, &command, error_kind(&e), &e.to_string());
        return ExitCode::from(exit_code(&e));
    }
    let start = Instant::now();
    match dispatch(&cli) {
        Ok((inputs, result, bits)) => {
            // Precision metadata: exact payloads say so; float payloads carry their bits.
            let precision = match bits {
                Some(b) => json!({ "exact": false, "bits": b, "digits": digits(b) }),
                None => json!({ "exact": true, "bits": Value::Null }),
            };
            let env = Envelope {
                command,
                inputs,
                result,
                timing: json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 }),
                precision,
            };
            match output::emit(cli.format, &env) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: writing output: {e}");
                    ExitCode::from(4)
                }
            }
        }
        Err(e) => {
            output::emit_error(cli.format, &command, error_kind(&e), &e.to_string());
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Domain("x".into())), 2);
        assert_eq!(exit_code(&Error::SizeLimit("x".into())), 3);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 4);
    }

    #[test]
    fn exact_rt_small() {
        let (_, r) = cmd_exact(Subject::Rt, Some(7), None).unwrap();
        assert_eq!(r["value"], "2640");
        assert!(matches!(cmd_exact(Subject::Rt, Some(4), None), Err(Error::Domain(_))));
    }

    #[test]
    fn table_agrees_with_recurrence() {
        for n in (1..=15).step_by(2) {
            assert_eq!(rt_table(n), Some(rt_count(n).unwrap()), "n = {n}");
        }
        assert!(rt_table(37).is_some());
        assert_eq!(rt_table(39), None);
    }

    #[test]
    fn digits_track_bits() {
        assert_eq!(digits(256), 75);
        assert_eq!(digits(1), 1);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
