//! One function per subcommand: resolve the configuration, call into
//! `avbc-core`, write CSV/JSON artifacts, and return the stdout summary.

use std::path::Path;

use avbc_core::bsbc::{
    example1_capacity, example1_member, example2_avbc_case1, example2_avbc_case2_bounds,
    example2_rp_capacity, Example1Params, Example2Case, Example2Params,
};
use avbc_core::channel::{
    single_user_strategy_channels, PublicStrategyMap, StateDmc, StrategyDist, StrategyMap,
};
use avbc_core::prob::{binary_convolve, binary_entropy, Pmf, TypeGrid};
use avbc_core::regions::{
    check_condition_t, degraded_bounds, region_jahn_no_si, RateRegion, RegionGrid, SearchSpace,
    DEFAULT_GRID_POINTS,
};
use avbc_core::sim::{eliminate, wilson_interval, Codebook, JammerSpec, Simulation};
use serde_json::json;

use crate::config::{Config, Family};
use crate::{Cli, Command, Failure};

/// Default β-sweep / state-grid resolution for region evaluations.
const DEFAULT_SWEEP: usize = 1001;
/// Default per-axis size of the minimax engine's search family.
const DEFAULT_FAMILY: usize = 101;
/// Default state-grid size for the simultaneous-minimizer check.
const DEFAULT_QGRID: usize = 101;
/// Strategy-distribution resolution of the no-side-information lattice.
const JAHN_LATTICE: usize = 20;

pub fn dispatch(cli: &Cli) -> Result<String, Failure> {
    let cfg = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Region => region(cli, &cfg),
        Command::RpCapacity => rp_capacity(cli, &cfg),
        Command::Jahn => jahn(cli, &cfg),
        Command::ConditionT => condition_t(cli, &cfg),
        Command::Symmetrizable => symmetrizable(cli, &cfg),
        Command::DegradedCheck => degraded_check(cli, &cfg),
        Command::Simulate => simulate(cli, &cfg),
        Command::Eliminate => eliminate_family(cli, &cfg),
        Command::Figure { name, dir } => figure(cli, name, dir.as_deref()),
    }
}

fn region_grid() -> RegionGrid {
    // binary alphabets cap every rate at 1 bit/symbol
    RegionGrid::new(1.0, DEFAULT_GRID_POINTS).expect("static grid parameters are valid")
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Runtime(format!("cannot serialize {name}: {e}")))?;
    write_file(dir, name, &(text + "\n"))
}

fn family_value(fam: &Family) -> serde_json::Value {
    match fam {
        Family::Example1(p) => json!({"family": "example1", "params": p}),
        Family::Example2(p) => json!({"family": "example2", "params": p}),
    }
}

// ---------------------------------------------------------------------------
// region / rp-capacity / jahn
// ---------------------------------------------------------------------------

fn region(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let sweep = cli.grid.unwrap_or(DEFAULT_SWEEP);
    let fam = cfg.family()?;
    let mut meta = family_value(&fam);
    let summary;
    match &fam {
        Family::Example1(p) => {
            let cap = example1_capacity(p, sweep, region_grid())?;
            write_file(&cli.out, "region_capacity.csv", &cap.to_csv())?;
            meta["files"] = json!(["region_capacity.csv"]);
            meta["y_max"] = json!(cap.y_max());
            summary = format!(
                "worst-state capacity region -> {}/region_capacity.csv",
                cli.out.display()
            );
        }
        Family::Example2(p) => match p.case() {
            Example2Case::Case1 => {
                let cap = example2_avbc_case1(p, sweep, region_grid())?;
                write_file(&cli.out, "region_capacity.csv", &cap.to_csv())?;
                meta["case"] = json!("case1");
                meta["files"] = json!(["region_capacity.csv"]);
                meta["y_max"] = json!(cap.y_max());
                summary = format!(
                    "single-frequency capacity region -> {}/region_capacity.csv",
                    cli.out.display()
                );
            }
            Example2Case::Case2 => {
                let (inner, outer) = example2_avbc_case2_bounds(p, sweep, region_grid())?;
                write_file(&cli.out, "region_inner.csv", &inner.to_csv())?;
                write_file(&cli.out, "region_outer.csv", &outer.to_csv())?;
                meta["case"] = json!("case2");
                meta["files"] = json!(["region_inner.csv", "region_outer.csv"]);
                meta["inner_outer_hausdorff"] = json!(inner.hausdorff_distance(&outer));
                summary = format!(
                    "split-case bounds -> {}/region_inner.csv, region_outer.csv",
                    cli.out.display()
                );
            }
        },
    }
    meta["beta_points"] = json!(sweep);
    write_json(&cli.out, "region.json", &meta)?;
    Ok(summary)
}

fn rp_capacity(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let sweep = cli.grid.unwrap_or(DEFAULT_SWEEP);
    let q = cfg.q.unwrap_or(1.0);
    let fam = cfg.family()?;
    let reg = match &fam {
        Family::Example1(p) => example1_member(p, q, sweep, region_grid())?,
        Family::Example2(p) => example2_rp_capacity(p, q, sweep, region_grid())?,
    };
    let file = format!("rp_capacity_q{q:.3}.csv");
    write_file(&cli.out, &file, &reg.to_csv())?;
    let mut meta = family_value(&fam);
    meta["q"] = json!(q);
    meta["beta_points"] = json!(sweep);
    meta["files"] = json!([file]);
    meta["y_max"] = json!(reg.y_max());
    write_json(&cli.out, "rp_capacity.json", &meta)?;
    Ok(format!("known-frequency region at q = {q} -> {}/{file}", cli.out.display()))
}

fn jahn(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let points = cli.grid.unwrap_or(DEFAULT_SWEEP);
    let w = cfg.channel()?;
    let p_ux = SearchSpace::joint_lattice(2, 2, JAHN_LATTICE)?;
    let qs = SearchSpace::binary_q_grid(points)?;
    let reg = region_jahn_no_si(&w, &p_ux, &qs, region_grid())?;
    let collapsed = reg.is_origin_only(1e-6);
    write_file(&cli.out, "jahn.csv", &reg.to_csv())?;
    let mut meta = family_value(&cfg.family()?);
    meta["q_points"] = json!(points);
    meta["lattice_resolution"] = json!(JAHN_LATTICE);
    meta["origin_only"] = json!(collapsed);
    meta["files"] = json!(["jahn.csv"]);
    write_json(&cli.out, "jahn.json", &meta)?;
    Ok(if collapsed {
        "state-oblivious region collapses to the origin".into()
    } else {
        format!("state-oblivious region has positive rates (y_max = {:.6})", reg.y_max())
    })
}

// ---------------------------------------------------------------------------
// condition-t / symmetrizable / degraded-check
// ---------------------------------------------------------------------------

fn condition_t(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let w = cfg.channel()?;
    let dists = SearchSpace::product_bernoulli_grid(21, 0.05, 0.45)?;
    let qs = SearchSpace::binary_q_grid(cli.grid.unwrap_or(DEFAULT_QGRID))?;
    let report = check_condition_t(&w, &StrategyMap::xor3(), &dists, &qs, 1e-6)?;
    let value = serde_json::to_value(&report)
        .map_err(|e| Failure::Runtime(format!("cannot serialize report: {e}")))?;
    write_json(&cli.out, "condition_t.json", &value)?;
    Ok(match (&report.q_star, report.q_star_index) {
        (Some(q), Some(i)) => format!(
            "common minimizer holds: q* = {:.4} (grid index {i}); wrote condition_t.json",
            q.get(1)
        ),
        _ => "no common minimizer across the family; wrote condition_t.json".into(),
    })
}

fn witness_value(v: &StateDmc, tol: f64) -> Result<serde_json::Value, Failure> {
    Ok(match avbc_core::symmetrizability::is_symmetrizable(v, tol)? {
        Some(w) => json!({
            "symmetrizable": true,
            "kernel": w.kernel(),
            "max_violation": w.max_violation(v),
        }),
        None => json!({"symmetrizable": false}),
    })
}

fn symmetrizable(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let tol = 1e-9;
    let (value, summary) = if let Some(v) = cfg.state_dmc()? {
        let verdict = witness_value(&v, tol)?;
        let yes = verdict["symmetrizable"].as_bool().unwrap_or(false);
        (
            json!({"targets": {"dmc": verdict}}),
            format!("dmc: {}symmetrizable", if yes { "" } else { "not " }),
        )
    } else {
        let w = cfg.channel()?;
        let (v1, v2) = single_user_strategy_channels(&PublicStrategyMap::xor2(), &w)?;
        let (r1, r2) = (witness_value(&v1, tol)?, witness_value(&v2, tol)?);
        let s = format!(
            "user 1: {}symmetrizable; user 2: {}symmetrizable",
            if r1["symmetrizable"].as_bool().unwrap_or(false) { "" } else { "not " },
            if r2["symmetrizable"].as_bool().unwrap_or(false) { "" } else { "not " },
        );
        (json!({"strategy": "xor2", "targets": {"user1": r1, "user2": r2}}), s)
    };
    write_json(&cli.out, "symmetrizable.json", &value)?;
    Ok(format!("{summary}; wrote symmetrizable.json"))
}

fn degraded_check(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let pts = cli.grid.unwrap_or(DEFAULT_FAMILY);
    let fam = cfg.family()?;
    let w = cfg.channel()?;
    let space = SearchSpace::xor_product_family(pts, pts)?;
    let (inner, outer) = degraded_bounds(&w, &space, region_grid())?;
    write_file(&cli.out, "degraded_inner.csv", &inner.to_csv())?;
    write_file(&cli.out, "degraded_outer.csv", &outer.to_csv())?;

    let mut meta = family_value(&fam);
    meta["family_points"] = json!(pts);
    meta["files"] = json!(["degraded_inner.csv", "degraded_outer.csv"]);
    meta["inner_outer_hausdorff"] = json!(inner.hausdorff_distance(&outer));
    let mut summary = format!(
        "engine bounds within {:.2e} bits of each other",
        inner.hausdorff_distance(&outer)
    );
    if let Family::Example1(p) = &fam {
        let cap = example1_capacity(p, DEFAULT_SWEEP, region_grid())?;
        let (di, do_) = (inner.hausdorff_distance(&cap), outer.hausdorff_distance(&cap));
        meta["closed_form_hausdorff_inner"] = json!(di);
        meta["closed_form_hausdorff_outer"] = json!(do_);
        summary.push_str(&format!("; closed form within {:.2e}/{:.2e}", di, do_));
    }
    write_json(&cli.out, "degraded_check.json", &meta)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// simulate / eliminate
// ---------------------------------------------------------------------------

/// Worst-state frontier corner (cloud rate, satellite rate) at a given
/// auxiliary crossover, for either family.
fn worst_corner(fam: &Family, beta: f64) -> Result<(f64, f64), Failure> {
    let (d, e) = match fam {
        // state-1 crossovers; the outer convolution for user 2's rate is the
        // extra noise α
        Family::Example1(p) => (1.0 - p.theta1, 1.0 - p.theta1),
        Family::Example2(p) => (1.0 - p.theta1, 1.0 - p.eps1),
    };
    let bd = binary_convolve(beta, d)?;
    let r1 = binary_entropy(bd)? - binary_entropy(d)?;
    let r0 = match fam {
        Family::Example1(p) => 1.0 - binary_entropy(binary_convolve(p.alpha, bd)?)?,
        Family::Example2(_) => 1.0 - binary_entropy(binary_convolve(beta, e)?)?,
    };
    Ok((r0, r1))
}

fn count_for(n: usize, rate: f64) -> u64 {
    (n as f64 * rate).exp2().round().max(1.0) as u64
}

fn simulate(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let n = cfg.n.unwrap_or(64);
    let beta = cfg.beta.unwrap_or(0.03);
    let q = cfg.q.unwrap_or(0.5);
    let scale = cfg.scale.unwrap_or(0.7);
    let fam = cfg.family()?;
    let (r0, r1) = worst_corner(&fam, beta)?;
    let (m0, m1) = match (cfg.m0, cfg.m1) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => (count_for(n, scale * r0), count_for(n, scale * r1)),
        _ => return Err(Failure::Invalid("m0 and m1 must be given together".into())),
    };

    let p = StrategyDist::product_bernoulli(0.5, beta)?;
    let cb = Codebook::with_counts(p, StrategyMap::xor3(), n, m0, m1, cli.seed)?;
    let sim = Simulation::new(
        cfg.channel()?,
        cb,
        JammerSpec::iid(&Pmf::bernoulli(q)?),
        TypeGrid::full(n, 2)?,
        cli.delta,
    )?;
    let stats = sim.run(cli.trials, cli.seed.wrapping_add(1))?;
    let (lo, hi) = wilson_interval(stats.total_errors, stats.trials, 1.96);

    let mut meta = family_value(&fam);
    meta["n"] = json!(n);
    meta["beta"] = json!(beta);
    meta["q"] = json!(q);
    meta["delta"] = json!(cli.delta);
    meta["seed"] = json!(cli.seed);
    meta["m0"] = json!(m0);
    meta["m1"] = json!(m1);
    meta["corner"] = json!({"r0": r0, "r1": r1, "scale": scale});
    meta["trials"] = json!(stats.trials);
    meta["dec1_errors"] = json!(stats.dec1_errors);
    meta["dec2_errors"] = json!(stats.dec2_errors);
    meta["total_errors"] = json!(stats.total_errors);
    meta["total_rate"] = json!(stats.total_rate());
    meta["wilson_95"] = json!([lo, hi]);
    write_json(&cli.out, "simulate.json", &meta)?;

    Ok(format!(
        "total error {:.4} over {} trials (95% CI [{lo:.4}, {hi:.4}]); wrote simulate.json",
        stats.total_rate(),
        stats.trials
    ))
}

fn eliminate_family(cli: &Cli, cfg: &Config) -> Result<String, Failure> {
    let n = cfg.n.unwrap_or(32);
    if n == 0 {
        return Err(Failure::Invalid("blocklength n must be positive".into()));
    }
    let fam = eliminate(n, cli.seed);
    write_json(
        &cli.out,
        "eliminate.json",
        &json!({"n": n, "k": fam.k(), "seed": cli.seed}),
    )?;
    Ok(format!("reduced family of {} permuted codes at n = {n}; wrote eliminate.json", fam.k()))
}

// ---------------------------------------------------------------------------
// figure
// ---------------------------------------------------------------------------

fn write_curves(
    dir: &Path,
    prefix: &str,
    qs: &[f64],
    decimals: usize,
    mut member: impl FnMut(f64) -> Result<RateRegion, Failure>,
) -> Result<Vec<String>, Failure> {
    let mut files = Vec::new();
    for &q in qs {
        let file = format!("{prefix}_q{q:.prec$}.csv", prec = decimals);
        write_file(dir, &file, &member(q)?.to_csv())?;
        files.push(file);
    }
    Ok(files)
}

fn figure(cli: &Cli, name: &str, dir: Option<&Path>) -> Result<String, Failure> {
    let out = dir.unwrap_or(&cli.out);
    let sweep = cli.grid.unwrap_or(DEFAULT_SWEEP);
    let grid = region_grid();
    let mut files: Vec<String>;
    let meta = match name {
        "fig2" => {
            let p = Example1Params::new(0.005, 0.9, 0.2)?;
            let qs = [0.0, 0.25, 0.5, 0.75, 1.0];
            files = write_curves(out, "fig2", &qs, 2, |q| {
                Ok(example1_member(&p, q, sweep, grid)?)
            })?;
            let cap = example1_capacity(&p, sweep, grid)?;
            write_file(out, "fig2_capacity.csv", &cap.to_csv())?;
            files.push("fig2_capacity.csv".into());
            json!({"figure": "fig2", "family": "example1", "params": p, "q_values": qs})
        }
        "fig3" => {
            let p = Example2Params::new(0.12, 0.85, 0.18, 0.78)?;
            let qs = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
            files = write_curves(out, "fig3", &qs, 3, |q| {
                Ok(example2_rp_capacity(&p, q, sweep, grid)?)
            })?;
            let cap = example2_avbc_case1(&p, sweep, grid)?;
            write_file(out, "fig3_capacity.csv", &cap.to_csv())?;
            files.push("fig3_capacity.csv".into());
            json!({"figure": "fig3", "family": "example2", "params": p, "q_values": qs})
        }
        "fig4" => {
            let p = Example2Params::new(0.12, 0.85, 0.22, 0.88)?;
            let qs = [0.0, 0.25, 0.5, 0.75, 1.0];
            files = write_curves(out, "fig4", &qs, 2, |q| {
                Ok(example2_rp_capacity(&p, q, sweep, grid)?)
            })?;
            let (inner, outer) = example2_avbc_case2_bounds(&p, sweep, grid)?;
            write_file(out, "fig4_inner.csv", &inner.to_csv())?;
            write_file(out, "fig4_outer.csv", &outer.to_csv())?;
            files.push("fig4_inner.csv".into());
            files.push("fig4_outer.csv".into());
            json!({"figure": "fig4", "family": "example2", "params": p, "q_values": qs})
        }
        other => {
            return Err(Failure::Invalid(format!(
                "unknown figure {other:?}: expected fig2, fig3, or fig4"
            )))
        }
    };
    let mut meta = meta;
    meta["beta_points"] = json!(sweep);
    meta["files"] = json!(files);
    write_json(out, &format!("{name}.json"), &meta)?;
    Ok(format!("wrote {} CSV files and {name}.json to {}", files.len(), out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_count_for_rounds_and_floors_at_one() {
        assert_eq!(count_for(64, 0.0), 1);
        assert_eq!(count_for(4, 0.5), 4);
        // 2^3.2 = 9.19 rounds down
        assert_eq!(count_for(64, 0.05), 9);
    }

    #[test]
    fn test_worst_corner_matches_direct_formulas() {
        let fam = Family::Example2(Example2Params::new(0.12, 0.85, 0.18, 0.78).unwrap());
        let (r0, r1) = worst_corner(&fam, 0.03).unwrap();
        assert!((r0 - 0.210_321_829_5).abs() < 1e-9);
        assert!((r1 - 0.050_146_946_3).abs() < 1e-9);

        // the impostor-free axis corner has zero satellite rate
        let (_, r1_axis) = worst_corner(&fam, 0.0).unwrap();
        assert!(r1_axis.abs() < 1e-12);
    }
}
