//! Acceptance suite. Runs every criterion at its stated tolerance and time
//! budget, prints one line per criterion and exits nonzero if any fails.
//!
//! Run alone with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cache_mimo::analysis::{
    self, sweep_cache_size, sweep_rho0, CachingStatistics, LargeSystem, Mode, PlacementModel, PrecoderFamily,
    SweepMethod, SweepTemplate,
};
use cache_mimo::asymptotics;
use cache_mimo::channel;
use cache_mimo::cli::validate;
use cache_mimo::exec::Exec;
use cache_mimo::precoding::PrecoderKind;
use cache_mimo::rates::{self, CachePolicy};
use cache_mimo::scenario::{derive_sets, CacheState, SystemConfig};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn caching_probability() -> Outcome {
    let stats = CachingStatistics::new(100, 20, 100).map_err(err)?;
    let est = analysis::mc_validate_pu(100, 20, 1_000_000, PlacementModel::IndependentPerFile, 1, Exec::Parallel)
        .map_err(err)?;
    let exact = (stats.p_u - 0.51328).abs() < 1e-12;
    let mc = est.within_sigmas(stats.p_u, 3.0);
    ensure(
        exact && mc,
        format!("p_u = {:.6}, MC = {:.5} +/- {:.5} (3 sigma)", stats.p_u, est.mean, 3.0 * est.stderr),
    )
}

fn offloading_fraction() -> Outcome {
    let stats = CachingStatistics::new(100, 20, 100).map_err(err)?;
    let exact = stats.expected_active / 100.0;
    let config = SystemConfig::new(1, 100, 100, 20).with_seed(2);
    let mc = validate::mc_active_fraction(&config, 10_000, Exec::Parallel);
    ensure(
        (exact - 0.8).abs() < 1e-15 && (mc - 0.8).abs() <= 0.01,
        format!("E{{K_bar}}/K = {exact}, MC = {mc:.5}"),
    )
}

fn non_interfering_fraction() -> Outcome {
    let stats = CachingStatistics::new(100, 20, 100).map_err(err)?;
    let f = 1.0 - stats.p_u;
    ensure(
        (f - 0.48672).abs() < 1e-12 && format!("{f:.3}") == "0.487",
        format!("1 - p_u = {f:.5}"),
    )
}

fn zf_cache_gain() -> Outcome {
    let limit = validate::zf_cache_gain(100, 20, 1.4, 10.0, 0.5).map_err(err)?;
    // expected counts at a large finite K
    let stats = CachingStatistics::new(100, 20, 10_000).map_err(err)?;
    let k = 10_000.0;
    let e0 = 10.0;
    let proposed = rates::zf_bound_uniform(0.5, 1.4 * k, stats.expected_protected, stats.expected_active, e0, 1.0)
        .map_err(err)?;
    let baseline = rates::zf_bound_baseline(0.5, 1.4 * k, k, e0, 1.0).map_err(err)?;
    let finite = proposed / baseline - 1.0;
    let band = 0.68..=0.72;
    ensure(
        band.contains(&limit) && band.contains(&finite),
        format!("gain = {limit:.4} (limit), {finite:.4} (K = 10^4)"),
    )
}

fn ordering_vs_rho0() -> Outcome {
    let template = SweepTemplate::default();
    let grid: Vec<f64> = (0..40).map(|i| (1.05f64.ln() + i as f64 / 39.0 * (3.0f64 / 1.05).ln()).exp()).collect();
    let modes = [Mode::Proposed, Mode::Baseline];
    let r = sweep_rho0(&template, &grid, &PrecoderFamily::ALL, &modes, SweepMethod::Analytic, Exec::Parallel)
        .map_err(err)?;
    let rates = |p, m| -> Result<Vec<f64>, String> {
        r.series(p, m)
            .ok_or("missing series")?
            .rates()
            .into_iter()
            .map(|x| x.ok_or_else(|| format!("{} {} infeasible", p.name(), m.name())))
            .collect()
    };
    for p in PrecoderFamily::ALL {
        let (a, b) = (rates(p, Mode::Proposed)?, rates(p, Mode::Baseline)?);
        if let Some(i) = (0..grid.len()).find(|&i| a[i] < b[i]) {
            return Err(format!("{} proposed < baseline at rho0 = {}", p.name(), grid[i]));
        }
    }
    let (mrt, zf, rzf) = (
        rates(PrecoderFamily::Mrt, Mode::Proposed)?,
        rates(PrecoderFamily::Zf, Mode::Proposed)?,
        rates(PrecoderFamily::Rzf, Mode::Proposed)?,
    );
    if let Some(i) = (0..grid.len()).find(|&i| !(rzf[i] >= zf[i] && zf[i] >= mrt[i])) {
        return Err(format!("RZF >= ZF >= MRT violated at rho0 = {}", grid[i]));
    }
    let stats = CachingStatistics::new(100, 20, 2).map_err(err)?;
    let mrt_p = LargeSystem::new(0.5, 10.0, &stats, Mode::Proposed).mrt(1.1).map_err(err)?;
    let mrt_b = LargeSystem::new(0.5, 10.0, &stats, Mode::Baseline).mrt(1.8).map_err(err)?;
    ensure(mrt_p >= mrt_b, format!("MRT proposed(1.1) = {mrt_p:.4} vs baseline(1.8) = {mrt_b:.4}; orderings hold"))
}

fn monotone_in_cache_size() -> Outcome {
    let template = SweepTemplate::default();
    let grid: Vec<usize> = (0..=50).step_by(5).collect();
    let modes = [Mode::Proposed, Mode::Baseline];
    let r = sweep_cache_size(&template, &grid, &PrecoderFamily::ALL, &modes, SweepMethod::Analytic, Exec::Parallel)
        .map_err(err)?;
    let rates = |p, m| -> Vec<f64> { r.series(p, m).unwrap().rates().into_iter().map(|x| x.unwrap()).collect() };
    for p in PrecoderFamily::ALL {
        let a = rates(p, Mode::Proposed);
        let b = rates(p, Mode::Baseline);
        if a.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("{} proposed decreases in L_u", p.name()));
        }
        if b.iter().any(|x| x != &b[0]) {
            return Err(format!("{} baseline varies with L_u", p.name()));
        }
        if (a[0] - b[0]).abs() > 1e-12 {
            return Err(format!("{} proposed != baseline at L_u = 0", p.name()));
        }
    }
    for m in modes {
        let (mrt, zf, rzf) = (rates(PrecoderFamily::Mrt, m), rates(PrecoderFamily::Zf, m), rates(PrecoderFamily::Rzf, m));
        if (0..grid.len()).any(|i| rzf[i] < zf[i].max(mrt[i])) {
            return Err(format!("RZF not best in {} mode", m.name()));
        }
    }
    let z = rates(PrecoderFamily::Zf, Mode::Proposed);
    ensure(true, format!("ZF proposed {:.4} -> {:.4} over L_u = 0..50", z[0], z[z.len() - 1]))
}

fn inverse_chi_square() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (m, beta, seed) in [(4usize, 1.0, 7u64), (11, 0.5, 8)] {
        let target = 1.0 / (beta * (m as f64 - 1.0));
        let e = channel::inv_norm_expectation_oracle(m, beta, 100_000, seed, Exec::Parallel).map_err(err)?;
        let rel = e.relative_error(target);
        ok &= rel < 0.02;
        detail.push(format!("M={m}: {:.5} vs {:.5} ({:.2}%)", e.mean, target, 100.0 * rel));
    }
    ensure(ok, detail.join(", "))
}

fn inverse_wishart() -> Outcome {
    let target = 1.0 / 4.0;
    let e = rates::zf_noise_enhancement_oracle(8, 3, 1.0, 100_000, 9, Exec::Parallel).map_err(err)?;
    let rel = e.relative_error(target);
    ensure(rel < 0.02, format!("{:.5} vs {target} ({:.2}%)", e.mean, 100.0 * rel))
}

fn g_identities() -> Outcome {
    let residual = validate::g_quadratic_residual().map_err(err)?;
    let gap = validate::g_oracle_gap(validate::G_QUADRATURE_POINTS).map_err(err)?;
    let deriv = validate::g_derivative_gap().map_err(err)?;
    ensure(
        residual < 1e-12 && gap < 1e-6 && deriv < 1e-6,
        format!("residual {residual:.1e}, quadrature gap {gap:.1e}, derivative rel gap {deriv:.1e}"),
    )
}

fn jensen_ordering() -> Outcome {
    let base = SystemConfig::new(32, 24, 100, 20).with_seed(10);
    let mut worst = f64::INFINITY;
    for state in 0..5u64 {
        let config = base.clone().with_seed(100 + state);
        let cs = CacheState::random(&config, state);
        let sets = derive_sets(&cs);
        for kind in [PrecoderKind::Mrt, PrecoderKind::Zf] {
            let mc = rates::mc_ergodic_rate(&config, &CachePolicy::Fixed(cs.clone()), kind, 10_000, Exec::Parallel)
                .map_err(err)?;
            let bound = rates::deterministic_rates(&config, &sets, kind).map_err(err)?;
            for b in &bound.per_user {
                let u = mc.user(b.user).ok_or("missing user")?;
                let slack = u.rate + 3.0 * u.stderr.unwrap_or(0.0) - b.rate;
                if slack < 0.0 {
                    return Err(format!(
                        "state {state} {} user {}: MC {:.4} < bound {:.4}",
                        kind.name(),
                        b.user,
                        u.rate,
                        b.rate
                    ));
                }
                worst = worst.min(slack);
            }
        }
    }
    ensure(true, format!("all users of 5 states; smallest MC + 3 sigma - bound = {worst:.4}"))
}

/// All users active. User 0 protects users `1..=protected` and is interfered
/// by users `1..=interferers`, each of which protects `protected` users too.
fn rzf_target_state(users: usize, protected: usize, interferers: usize) -> Vec<Vec<u8>> {
    let mut s = vec![vec![0u8; users]; users];
    for (l, row) in s.iter_mut().enumerate() {
        row[l] = 1;
        if l == 0 {
            row[1..=protected].fill(1);
        } else if l <= interferers {
            row[0] = 1;
            for j in (1..users).filter(|&j| j != l).take(protected - 1) {
                row[j] = 1;
            }
        } else {
            row[1..].fill(1);
        }
    }
    s
}

/// Monte Carlo rate of user 0 against the deterministic equivalent, with
/// `E_k = 0.125`, `beta = 0.5`, unit noise and `xi = 0.1`.
fn rzf_point(antennas: usize, users: usize, trials: u64) -> Result<(f64, f64, f64), String> {
    let (protected, interferers, xi, e) = (antennas / 2, 50, 0.1, 0.125);
    let (cs, lb, lu) = CacheState::realize(&rzf_target_state(users, protected, interferers));
    let sets = derive_sets(&cs);
    let loads_ok = sets.interferers[0].iter().all(|&l| sets.d(l) == protected);
    if (sets.d(0), sets.n(0), sets.active_count()) != (protected, interferers, users) || !loads_ok {
        return Err(format!("bad construction: D = {}, N = {}", sets.d(0), sets.n(0)));
    }
    let e0 = e * users as f64;
    let config = SystemConfig::new(antennas, users, lb, lu).with_snr_db(10.0 * e0.log10()).with_seed(11);
    let target = asymptotics::rzf_rate(antennas as f64, 0.5, e, &vec![(e, 0.5, xi); interferers], 0.5, xi, 1.0)
        .map_err(err)?;
    let kind = PrecoderKind::Rzf { alpha: xi * antennas as f64 };
    let mc = rates::mc_ergodic_rate_for(&config, &sets, kind, &[0], trials, Exec::Parallel).map_err(err)?;
    Ok((mc.per_user[0].rate, mc.per_user[0].stderr.unwrap_or(0.0), target))
}

fn rzf_convergence() -> Outcome {
    // M = 256 as stated; the quoted 2.241 is the M = 100 worked chain (E0 = 10, K_bar = 80)
    let (rate, se, target) = rzf_point(256, 130, 60)?;
    let rel = (rate - target).abs() / target;
    let (rate100, se100, target100) = rzf_point(100, 80, 200)?;
    let rel100 = (rate100 - target100).abs() / target100;
    ensure(
        rel < 0.05 && rel100 < 0.05 && (target100 - 2.241).abs() < 5e-4,
        format!(
            "M=256: MC {rate:.4} (+/- {se:.4}) vs {target:.4} ({:.2}%); M=100: MC {rate100:.4} (+/- {se100:.4}) vs {target100:.4} ({:.2}%)",
            100.0 * rel,
            100.0 * rel100
        ),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "caching probability", budget: s(10), run: caching_probability },
        Criterion { id: 2, name: "offloading fraction", budget: s(60), run: offloading_fraction },
        Criterion { id: 3, name: "non-interfering fraction", budget: s(1), run: non_interfering_fraction },
        Criterion { id: 4, name: "ZF cache gain", budget: s(1), run: zf_cache_gain },
        Criterion { id: 5, name: "rate vs antennas ordering", budget: s(60), run: ordering_vs_rho0 },
        Criterion { id: 6, name: "rate vs cache size monotonicity", budget: s(60), run: monotone_in_cache_size },
        Criterion { id: 7, name: "inverse chi-square oracle", budget: s(60), run: inverse_chi_square },
        Criterion { id: 8, name: "inverse Wishart oracle", budget: s(60), run: inverse_wishart },
        Criterion { id: 9, name: "G identities", budget: s(60), run: g_identities },
        Criterion { id: 10, name: "Jensen ordering", budget: s(120), run: jensen_ordering },
        Criterion { id: 11, name: "RZF large-system convergence", budget: s(300), run: rzf_convergence },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str()) || c.id.to_string() == *f) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget {:?}", c.budget)),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {:>2} {}: {} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
