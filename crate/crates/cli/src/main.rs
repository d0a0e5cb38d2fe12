//! Command-line surface for nested pool-testing: planning, cost tables,
//! sweeps, simulation and the conjecture check.
//!
//! Data goes to standard output (JSON for single objects, CSV for tables);
//! diagnostics go to standard error. Exit statuses: 0 success, 2 usage
//! error, 3 an uncertified sign in the conjecture sweep, 4 a certified
//! non-negative gap (a conjecture violation).

mod render;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use pooltest::cost::cost;
use pooltest::linearized::optimal_linear_stages;
use pooltest::optimizer::{
    conjecture_sweep, conjectured_optimal, exhaustive_optimal, four_candidate_optimal,
    pooling_threshold, transition_table,
};
use pooltest::simulate::monte_carlo;
use pooltest::{Family, NestedStrategy, Prevalence};
use render::{float, float_array, int_array, json_string};

#[derive(Parser)]
#[command(name = "pooltest", version, about = "Nested pool-testing planner and simulator")]
struct Cli {
    /// Worker threads for simulation (default: all cores). Never changes output bytes.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Conjecture,
    #[value(name = "four_candidate")]
    FourCandidate,
    Exhaustive,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Conjecture => "conjecture",
            Mode::FourCandidate => "four_candidate",
            Mode::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Select the optimal strategy for a prevalence and print the plan.
    Plan {
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Mode::Conjecture)]
        mode: Mode,
        /// Largest first pool searched in exhaustive mode.
        #[arg(long, default_value_t = 81)]
        max_pool: i64,
    },
    /// Cost report for an explicit pool chain.
    Cost {
        #[arg(long)]
        p: f64,
        /// Comma-separated pool sizes, e.g. 27,9,3.
        #[arg(long)]
        pools: String,
    },
    /// Transition-point table as CSV.
    Transitions {
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
    /// Conjectured-optimal cost curve over a prevalence grid, as CSV.
    Sweep {
        #[arg(long)]
        pmin: f64,
        #[arg(long)]
        pmax: f64,
        #[arg(long)]
        points: usize,
        /// Log-spaced grid instead of linear.
        #[arg(long)]
        log: bool,
    },
    /// Seeded Monte Carlo simulation of a pool chain.
    Simulate {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        pools: String,
        #[arg(long)]
        replications: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Certified sign check of the four-family cost gap at p = 2^-j.
    Conjecture {
        #[arg(long, default_value_t = 2)]
        jmin: u32,
        #[arg(long, default_value_t = 51)]
        jmax: u32,
    },
    /// Linearized-cost optimum for a prevalence.
    Linearize {
        #[arg(long)]
        p: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first_line =
                e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            eprintln!("{first_line}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: could not configure {n} worker threads");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Plan { p, mode, max_pool } => plan(p, mode, max_pool),
        Command::Cost { p, pools } => cost_cmd(p, &pools),
        Command::Transitions { kmax } => transitions(kmax),
        Command::Sweep { pmin, pmax, points, log } => sweep(pmin, pmax, points, log),
        Command::Simulate { p, pools, replications, seed } => {
            simulate(p, &pools, replications, seed)
        }
        Command::Conjecture { jmin, jmax } => conjecture(jmin, jmax),
        Command::Linearize { p } => linearize(p),
    }
}

fn prevalence(p: f64) -> Result<Prevalence, String> {
    Prevalence::new(p).map_err(|e| e.to_string())
}

fn parse_pools(spec: &str) -> Result<NestedStrategy, String> {
    let mut pools = Vec::new();
    if !spec.trim().is_empty() {
        for part in spec.split(',') {
            let m: i64 = part
                .trim()
                .parse()
                .map_err(|_| format!("pool size '{}' is not an integer", part.trim()))?;
            pools.push(m);
        }
    }
    NestedStrategy::new(pools).map_err(|e| e.to_string())
}

fn plan(p: f64, mode: Mode, max_pool: i64) -> Result<ExitCode, String> {
    if !(p > 0.0 && p < 1.0) {
        return Err(format!("plan requires 0 < p < 1, got {p}"));
    }
    let prev = prevalence(p)?;
    let (strategy, report) = match mode {
        Mode::Conjecture => conjectured_optimal(&prev).map_err(|e| e.to_string())?,
        Mode::FourCandidate => {
            if p >= pooling_threshold() {
                let s = NestedStrategy::individual();
                let r = cost(&s, &prev);
                (s, r)
            } else {
                let (s, r, _) = four_candidate_optimal(&prev).map_err(|e| e.to_string())?;
                (s, r)
            }
        }
        Mode::Exhaustive => {
            if !(2..=2000).contains(&max_pool) {
                return Err(format!("--max-pool must lie in 2..=2000, got {max_pool}"));
            }
            exhaustive_optimal(&prev, max_pool)
        }
    };
    println!(
        "{{\"p\":{},\"mode\":{},\"k\":{},\"pools\":{},\"cost\":{},\"stage_means\":{},\"tree\":{}}}",
        float(p),
        json_string(mode.name()),
        strategy.stages(),
        int_array(strategy.pools()),
        float(report.cost),
        float_array(&report.stage_means),
        json_string(&render::tree(&strategy)),
    );
    Ok(ExitCode::SUCCESS)
}

fn cost_cmd(p: f64, pools: &str) -> Result<ExitCode, String> {
    let strategy = parse_pools(pools)?;
    let prev = prevalence(p)?;
    let report = cost(&strategy, &prev);
    let variance = report.variance_per_pool.map_or("null".to_string(), float);
    println!(
        "{{\"cost\":{},\"stage_means\":{},\"variance_per_pool\":{}}}",
        float(report.cost),
        float_array(&report.stage_means),
        variance,
    );
    Ok(ExitCode::SUCCESS)
}

fn transitions(kmax: u32) -> Result<ExitCode, String> {
    if !(1..=40).contains(&kmax) {
        return Err(format!("--kmax must lie in 1..=40, got {kmax}"));
    }
    println!("k,lambda_k,rho_k_minus_1");
    for row in transition_table(kmax).rows {
        println!("{},{},{}", row.k, float(row.lambda), float(row.rho_prev));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(pmin: f64, pmax: f64, points: usize, log: bool) -> Result<ExitCode, String> {
    if !(pmin > 0.0 && pmin < pmax && pmax < 1.0) {
        return Err(format!("sweep requires 0 < pmin < pmax < 1, got [{pmin}, {pmax}]"));
    }
    if points < 2 {
        return Err(format!("--points must be at least 2, got {points}"));
    }
    println!("p,cost,k,family");
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let p = if log {
            (pmin.ln() + t * (pmax.ln() - pmin.ln())).exp()
        } else {
            pmin + t * (pmax - pmin)
        };
        let prev = prevalence(p)?;
        let (strategy, report) = conjectured_optimal(&prev).map_err(|e| e.to_string())?;
        let family = if strategy.stages() == 0 {
            "none"
        } else if Family::classify(&strategy) == Some(Family::M34) {
            "m34"
        } else {
            "m33"
        };
        println!("{},{},{},{}", float(p), float(report.cost), strategy.stages(), family);
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(p: f64, pools: &str, replications: u64, seed: u64) -> Result<ExitCode, String> {
    let strategy = parse_pools(pools)?;
    let prev = prevalence(p)?;
    if replications < 1 {
        return Err("--replications must be at least 1".to_string());
    }
    let r = monte_carlo(&strategy, &prev, replications, seed);
    println!(
        "{{\"replications\":{},\"mean_tests_per_pool\":{},\"mean_tests_per_individual\":{},\
         \"variance_tests_per_pool\":{},\"stage_counts\":{},\"std_error_mean\":{},\"seed\":{}}}",
        r.replications,
        float(r.mean_tests_per_pool),
        float(r.mean_tests_per_individual),
        float(r.variance_tests_per_pool),
        float_array(&r.stage_counts),
        float(r.std_error_mean),
        r.seed,
    );
    Ok(ExitCode::SUCCESS)
}

fn conjecture(jmin: u32, jmax: u32) -> Result<ExitCode, String> {
    if !(2 <= jmin && jmin <= jmax && jmax <= 51) {
        return Err(format!(
            "conjecture requires 2 <= jmin <= jmax <= 51, got [{jmin}, {jmax}]"
        ));
    }
    let records = conjecture_sweep(jmin, jmax, &[]).map_err(|e| e.to_string())?;
    println!("j,p,phi,sign_certified,winner");
    let mut uncertified = false;
    let mut violation = false;
    for (j, record) in (jmin..=jmax).zip(&records) {
        println!(
            "{},{},{},{},{}",
            j,
            float(record.p),
            float(record.phi),
            record.sign_certified,
            record.winner(),
        );
        if !record.sign_certified {
            uncertified = true;
        } else if record.phi >= 0.0 {
            violation = true;
        }
    }
    if violation {
        Ok(ExitCode::from(4))
    } else if uncertified {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn linearize(p: f64) -> Result<ExitCode, String> {
    let prev = prevalence(p)?;
    let plan = optimal_linear_stages(&prev).map_err(|e| e.to_string())?;
    let lower = plan.k_sharp.floor().max(1.0) as u32;
    let upper = plan.k_sharp.ceil().max(1.0) as u32;
    let mut comparison = Vec::new();
    for k in [lower, upper] {
        if comparison.iter().any(|(kk, _)| *kk == k) {
            continue;
        }
        let kf = k as f64;
        comparison.push((k, (kf + 1.0) * p.powf(kf / (kf + 1.0))));
    }
    let comparison_json: Vec<String> = comparison
        .iter()
        .map(|(k, l)| format!("{{\"k\":{},\"L_sharp_k\":{}}}", k, float(*l)))
        .collect();
    println!(
        "{{\"k_sharp\":{},\"L_sharp\":{},\"m_sharp\":{},\"integer_comparison\":[{}]}}",
        float(plan.k_sharp),
        float(plan.l_sharp),
        float_array(&plan.m_sharp),
        comparison_json.join(","),
    );
    Ok(ExitCode::SUCCESS)
}
