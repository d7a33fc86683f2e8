use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use geolab::experiments::{
    fit_exponent, run_eq4_grid, run_error_scan, run_exceptional_scan, write_eq4_csv,
    write_exceptional_csv, write_scan_csv, ScanConfig,
};
use geolab::gallagher::{check_inequality, random_terms, read_terms_csv, ExpSumSpec};
use geolab::geodesic_counts::{max_trace_for, read_cache, write_cache, TraceTable};
use geolab::spectral::{
    explicit_psi, load_zero_file, optimal_truncation, unit_window_inverse_sum, weyl_check,
    TruncationChoice, ZeroTable,
};
use geolab::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Cli, Command, GallagherArgs, ScanArgs};

/// Terms per random sum in `gallagher --random`.
const RANDOM_TERMS: usize = 16;

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Domain("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Domain(e.to_string()))?;
    }
    let ctx = Context {
        cache: cli.cache,
        zeros: cli.zeros,
    };
    match cli.command {
        Command::Count { x } => count(&ctx, x),
        Command::Table { t_max, out } => {
            let mut sink = output(out.as_deref())?;
            let table = ctx.traces(t_max)?;
            table.write_csv(&mut sink)?;
            sink.flush()?;
            Ok(())
        }
        Command::Explicit { x, t, uncapped } => explicit(&ctx, x, t, uncapped),
        Command::Scan(args) => scan(&ctx, args),
        Command::Exceptional {
            n_min,
            n_max,
            epsilon,
            samples,
            out,
        } => {
            let zeros = ctx.zeros()?;
            let mut sink = output(out.as_deref())?;
            let reports = run_exceptional_scan(n_min, n_max, epsilon, samples, &zeros)?;
            write_exceptional_csv(&reports, &mut sink)?;
            sink.flush()?;
            let total: f64 = reports.iter().map(|r| r.measure_estimate).sum();
            let bound: f64 = reports.iter().map(|r| r.paper_bound).sum();
            eprintln!("sum of estimates {total:.6e}, sum of bounds {bound:.6e}");
            Ok(())
        }
        Command::Eq4 {
            n_min,
            n_max,
            t_list,
            out,
        } => {
            let zeros = ctx.zeros()?;
            let mut sink = output(out.as_deref())?;
            let ns: Vec<u32> = (n_min..=n_max).collect();
            let cells = run_eq4_grid(&ns, &t_list, &zeros)?;
            write_eq4_csv(&cells, &mut sink)?;
            sink.flush()?;
            Ok(())
        }
        Command::Gallagher(args) => gallagher(args),
        Command::ValidateZeros => validate_zeros(&ctx),
    }
}

struct Context {
    cache: Option<PathBuf>,
    zeros: Option<PathBuf>,
}

impl Context {
    fn zeros(&self) -> Result<ZeroTable> {
        match &self.zeros {
            Some(path) => load_zero_file(path),
            None => ZeroTable::from_env_or_bundled(),
        }
    }

    /// Trace table up to `t_max`, from the cache when it covers the request.
    fn traces(&self, t_max: u64) -> Result<TraceTable> {
        let t_max = t_max.max(3);
        if let Some(path) = &self.cache {
            if path.exists() {
                let cached = read_cache(io::BufReader::new(File::open(path)?))?;
                if cached.t_max() >= t_max {
                    return Ok(cached);
                }
            }
            let table = TraceTable::build(t_max)?;
            let mut file = BufWriter::new(File::create(path)?);
            write_cache(&table, &mut file)?;
            return Ok(table);
        }
        TraceTable::build(t_max)
    }

    fn traces_for(&self, x: f64) -> Result<TraceTable> {
        self.traces(max_trace_for(x)?.unwrap_or(3))
    }
}

/// Opened before any work so a bad path fails fast.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn count(ctx: &Context, x: f64) -> Result<()> {
    let zeros = ctx.zeros()?;
    let table = ctx.traces_for(x)?;
    let s = table.snapshot(x)?;
    let mut out = io::stdout().lock();
    writeln!(out, "x={}", s.x)?;
    writeln!(out, "pi={}", s.pi)?;
    writeln!(out, "theta={:.10}", s.theta)?;
    writeln!(out, "psi={:.10}", s.psi)?;
    writeln!(out, "li={:.10}", s.li)?;
    if x > 1.0 {
        let height = zeros.max_gamma();
        let e = explicit_psi(x, &TruncationChoice::fixed(height), &zeros)?;
        writeln!(
            out,
            "explicit(T={height:.4}, uncapped)={:.10} residual={:.10} error_budget={:.6e}",
            e.value,
            e.value - s.psi,
            e.error_budget
        )?;
    }
    Ok(())
}

fn explicit(ctx: &Context, x: f64, t: f64, uncapped: bool) -> Result<()> {
    let zeros = ctx.zeros()?;
    zeros.require_coverage("T", t)?;
    let choice = TruncationChoice {
        capped: !uncapped,
        ..TruncationChoice::fixed(t)
    };
    let e = explicit_psi(x, &choice, &zeros)?;
    let psi = ctx.traces_for(x)?.psi(x)?;
    let mut out = io::stdout().lock();
    writeln!(out, "x={x}")?;
    writeln!(
        out,
        "T={t} ({})",
        if uncapped { "uncapped" } else { "capped" }
    )?;
    writeln!(out, "explicit={:.10}", e.value)?;
    writeln!(out, "psi={psi:.10}")?;
    writeln!(out, "residual={:.10}", e.value - psi)?;
    writeln!(out, "error_budget={:.6e}", e.error_budget)?;
    writeln!(
        out,
        "normalized={:.6e}",
        (e.value - psi).abs() / e.error_budget
    )?;
    if x > std::f64::consts::E {
        let optimal = optimal_truncation(x, 0.1, false)?;
        writeln!(out, "optimal_T(eps=0.1)={:.6}", optimal.uncapped_t)?;
    }
    Ok(())
}

fn scan(ctx: &Context, args: ScanArgs) -> Result<()> {
    let zeros = ctx.zeros()?;
    let mut sink = output(args.out.as_deref())?;
    let config = ScanConfig {
        t_scale: args.t_scale,
        ..ScanConfig::new(
            args.x_min,
            args.x_max,
            args.per_decade,
            args.epsilon,
            !args.uncapped,
        )
    };
    config.grid()?;
    let traces = ctx.traces_for(args.x_max)?;
    let rows = run_error_scan(&config, &traces, &zeros)?;
    write_scan_csv(&rows, &mut sink)?;
    sink.flush()?;
    let mode = if args.uncapped { "uncapped" } else { "capped" };
    let max_norm = rows.iter().map(|r| r.eq6_norm).fold(0.0, f64::max);
    eprintln!("{} rows ({mode}), max eq6_norm {max_norm:.6e}", rows.len());
    match fit_exponent(&rows) {
        Ok(fit) => eprintln!(
            "slope {:.6} over {} points in [{}, {}]",
            fit.slope, fit.points_used, fit.x_min, fit.x_max
        ),
        Err(e) => eprintln!("slope unavailable: {e}"),
    }
    Ok(())
}

fn gallagher(args: GallagherArgs) -> Result<()> {
    let mut out = io::stdout().lock();
    if let Some(path) = args.input {
        let terms = read_terms_csv(io::BufReader::new(File::open(path)?))?;
        let check = check_inequality(&ExpSumSpec::new(terms, args.theta, args.u)?);
        writeln!(out, "lhs={:.15e}", check.lhs)?;
        writeln!(out, "rhs={:.15e}", check.rhs)?;
        writeln!(out, "holds={}", check.holds)?;
        return Ok(());
    }
    let count = args.random.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut held = 0;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let spec = ExpSumSpec::new(random_terms(&mut rng, RANDOM_TERMS), args.theta, args.u)?;
        let check = check_inequality(&spec);
        if check.holds {
            held += 1;
        }
        if check.rhs > 0.0 {
            worst = worst.max(check.lhs / check.rhs);
        }
    }
    writeln!(out, "{held}/{count} hold")?;
    writeln!(out, "max lhs/rhs={worst:.6}")?;
    Ok(())
}

fn validate_zeros(ctx: &Context) -> Result<()> {
    let zeros = ctx.zeros()?;
    let mut out = io::stdout().lock();
    writeln!(out, "source={}", zeros.source())?;
    writeln!(out, "zeros={}", zeros.len())?;
    if zeros.is_empty() {
        writeln!(out, "weyl: count=0 valid=false")?;
        return Ok(());
    }
    let top = zeros.max_gamma();
    let weyl = weyl_check(&zeros, top)?;
    writeln!(out, "max_gamma={top}")?;
    writeln!(
        out,
        "weyl: count={} ratio={:.6} valid={}",
        weyl.count, weyl.ratio, weyl.valid
    )?;
    let mut worst = 0.0f64;
    let mut t = 0.0;
    while t + 1.0 <= top {
        worst = worst.max(unit_window_inverse_sum(&zeros, t)?);
        t += 0.25;
    }
    writeln!(out, "max unit-window sum={worst:.6}")?;
    Ok(())
}
