//! Property tests for probability, inference, solver and artifact invariants.

use deterrence_lab::distributions::{mixed_report_prob, ShockDistribution};
use deterrence_lab::equilibrium::{solve, EquilibriumProfile, Regime, SolverConfig};
use deterrence_lab::game_model::{
    informativeness_all, judge_app, judge_dpp, posterior_aggregate_all, posterior_specific_all, report_distribution,
    AgentCutoffs, ConvictionRule, Cutoffs, GameParams, PrincipalStrategy, Principle, StrategyProfile,
};
use deterrence_lab::sweeps::sweep_l;
use deterrence_lab::verification::{best_response_residuals, enumerate_outcomes, monte_carlo};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GameParams> {
    (1usize..=3, 0.2f64..3.0, 0.05f64..5.0, 1.0f64..1e3, 0.5f64..0.999, 0.05f64..0.95, 0.5f64..0.99, 0.2f64..=1.0)
        .prop_map(|(n, b, c, l, delta, alpha, pi_star, pi_o)| GameParams {
            n,
            b,
            c,
            l,
            delta,
            alpha,
            pi_star,
            pi_o,
            ..Default::default()
        })
}

/// Arbitrary valid profile with a full offense distribution and a monotone rule.
fn profile() -> impl Strategy<Value = StrategyProfile> {
    (params(), prop::collection::vec(0.01f64..1.0, 8), prop::collection::vec(0.0f64..1.0, 8), -3.0f64..3.0, 0.001f64..3.0)
        .prop_map(|(p, w, q, ws, drop)| {
            let n = p.n;
            let size = 1usize << n;
            let total: f64 = w[..size].iter().sum();
            let probs = w[..size].iter().map(|x| x / total).collect();
            // conviction probability increasing in each report: cumulative over sub-masks
            let mut table = vec![0.0; size];
            for a in 1..size {
                let below = (0..n).filter(|i| a >> i & 1 == 1).map(|i| table[a & !(1 << i)]).fold(0.0, f64::max);
                table[a] = below + (1.0 - below) * q[a].max(1e-3);
            }
            StrategyProfile::new(
                p,
                Principle::Aggregate,
                PrincipalStrategy::Full { probs },
                Cutoffs::Shared(AgentCutoffs { omega_star: ws, omega_star2: ws - drop }),
                ConvictionRule::table(table).unwrap(),
            )
            .unwrap()
        })
}

fn symmetric_profile() -> impl Strategy<Value = StrategyProfile> {
    (params(), 1usize..=3, 0.0f64..1.0, -3.0f64..3.0, 0.001f64..3.0).prop_map(|(p, k, r, ws, drop)| {
        let k = k.min(p.n);
        StrategyProfile::new(
            p,
            Principle::Aggregate,
            PrincipalStrategy::Mixed { k, r },
            Cutoffs::Shared(AgentCutoffs { omega_star: ws, omega_star2: ws - drop }),
            ConvictionRule::unanimous(p.n, 0.5).unwrap(),
        )
        .unwrap()
    })
}

fn quick() -> ProptestConfig {
    ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() }
}

/// `Pr(all agents but the first accuse | theta_1 = x)` from the outcome table.
fn others_accuse(profile: &StrategyProfile, witnessed: bool) -> f64 {
    let table = enumerate_outcomes(profile).unwrap();
    let n = profile.n();
    let others = ((1u32 << n) - 1) & !1;
    let (mut hit, mut all) = (0.0, 0.0);
    for c in table.cells.iter().filter(|c| (c.theta & 1 == 1) == witnessed) {
        all += c.prob;
        if c.reports & others == others {
            hit += c.prob;
        }
    }
    hit / all
}

fn check_solution(eq: &EquilibriumProfile, cfg: &SolverConfig) -> Result<(), TestCaseError> {
    let d = best_response_residuals(&eq.profile).unwrap();
    prop_assert!(d.max_gap() <= cfg.tol * 10.0, "gap {}", d.max_gap());
    prop_assert!(eq.omega_star() > eq.omega_star2());
    prop_assert!(eq.profile.rule.validate().is_ok());
    Ok(())
}

proptest! {
    #![proptest_config(quick())]

    #[test]
    fn report_probability_stays_inside_behavioral_band(cut in -40.0f64..40.0, delta in 0.01f64..0.99, alpha in 0.01f64..0.99) {
        let dist = ShockDistribution::standard();
        let psi = mixed_report_prob(cut, delta, alpha, &dist);
        let floor = (1.0 - delta) * alpha;
        prop_assert!(psi >= floor && psi <= floor + delta);
        // strict wherever the distance to a bound is resolvable in double precision
        let phi = dist.cdf(cut);
        if delta * phi > 2.0 * f64::EPSILON * floor {
            prop_assert!(psi > floor);
        }
        if delta * (1.0 - phi) > 2.0 * f64::EPSILON {
            prop_assert!(psi < floor + delta);
        }
    }

    #[test]
    fn cdf_is_monotone_and_bounded(mu in -2.0f64..2.0, sigma in 0.2f64..3.0, x in -20.0f64..20.0, dx in 0.0f64..5.0) {
        let d = ShockDistribution::new(mu, sigma).unwrap();
        let (lo, hi) = (d.cdf(x), d.cdf(x + dx));
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo);
        prop_assert!(d.pdf(x) >= 0.0);
    }

    #[test]
    fn posteriors_average_to_the_prior(profile in profile()) {
        let pa = report_distribution(&profile).unwrap();
        let agg = posterior_aggregate_all(&profile).unwrap();
        let mean: f64 = pa.iter().zip(&agg).map(|(p, x)| p * x).sum();
        prop_assert!((mean - profile.prior_guilt()).abs() <= 1e-10);
        let spec = posterior_specific_all(&profile).unwrap();
        let theta = enumerate_outcomes(&profile).unwrap().theta_probs();
        for i in 0..profile.n() {
            let marginal: f64 = theta.iter().enumerate().filter(|(t, _)| t >> i & 1 == 1).map(|(_, p)| p).sum();
            let mean: f64 = pa.iter().zip(&spec).map(|(p, s)| p * s[i]).sum();
            prop_assert!((mean - marginal).abs() <= 1e-10);
        }
    }

    #[test]
    fn more_accusations_never_lower_the_posterior(profile in symmetric_profile()) {
        let agg = posterior_aggregate_all(&profile).unwrap();
        let n = profile.n();
        let by_count: Vec<f64> = (0..=n).map(|m| agg[(1usize << m) - 1]).collect();
        for (a, x) in agg.iter().enumerate() {
            prop_assert!((x - by_count[a.count_ones() as usize]).abs() <= 1e-12);
        }
        for w in by_count.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", by_count);
        }
    }

    #[test]
    fn both_judges_agree_with_one_agent(profile in profile().prop_filter("one agent", |p| p.n() == 1)) {
        let pi_star = profile.params.pi_star;
        let app = judge_app(&posterior_aggregate_all(&profile).unwrap(), pi_star);
        let dpp = judge_dpp(&posterior_specific_all(&profile).unwrap(), pi_star);
        prop_assert_eq!(app, dpp);
    }

    #[test]
    fn likelihood_ratio_maps_prior_odds_to_posterior_odds(profile in profile()) {
        let prior = profile.prior_guilt();
        let ratio = informativeness_all(&profile).unwrap();
        let post = posterior_aggregate_all(&profile).unwrap();
        for (i, p) in ratio.iter().zip(&post) {
            let lhs = i * prior / (1.0 - prior);
            let rhs = p / (1.0 - p);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn unanimity_rules_are_substitutes(q in 1e-6f64..=1.0) {
        let (index, _) = ConvictionRule::unanimous(2, q).unwrap().substitutes_index().unwrap();
        prop_assert!(index > 0.0);
        let (index, _) = ConvictionRule::linear(2, q / 2.0).unwrap().substitutes_index().unwrap();
        prop_assert_eq!(index, 0.0);
    }

    #[test]
    fn simulated_frequencies_sum_to_one(profile in profile(), seed in any::<u64>()) {
        let report = monte_carlo(&profile, 2000, seed).unwrap();
        let reports: f64 = report.reports.iter().map(|r| r.frequency).sum();
        let events: f64 = report.events.iter().map(|r| r.frequency).sum();
        let counts: u64 = report.events.iter().map(|r| r.count).sum();
        prop_assert!((reports - 1.0).abs() <= 1e-12);
        prop_assert!((events - 1.0).abs() <= 1e-12);
        prop_assert_eq!(counts, 2000);
    }

    #[test]
    fn profiles_round_trip_through_json(profile in profile()) {
        let text = serde_json::to_string(&profile).unwrap();
        let back: StrategyProfile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, profile);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn single_agent_gap_is_b(b in 0.5f64..2.0, c in 0.5f64..10.0, delta in 0.9f64..0.999, lg in 1.0f64..4.0) {
        let cfg = SolverConfig::default();
        let p = GameParams { b, c, delta, l: 10f64.powf(lg), ..Default::default() };
        if let Ok(eq) = solve(Regime::SingleAgent, &p, &cfg) {
            check_solution(&eq, &cfg)?;
            prop_assert!((eq.omega_star() - eq.omega_star2() - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn one_agent_aggregate_matches_single(b in 0.5f64..2.0, c in 0.5f64..10.0, delta in 0.9f64..0.999, lg in 1.0f64..4.0) {
        let cfg = SolverConfig::default();
        let p = GameParams { b, c, delta, l: 10f64.powf(lg), ..Default::default() };
        if let (Ok(a), Ok(s)) = (solve(Regime::AppOneType, &p, &cfg), solve(Regime::SingleAgent, &p, &cfg)) {
            for (x, y) in [(a.q, s.q), (a.omega_star(), s.omega_star()), (a.omega_star2(), s.omega_star2()), (a.pi, s.pi)] {
                prop_assert!((x - y).abs() <= 1e-8, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn aggregate_two_agents(b in 0.1f64..1.0, c in 0.001f64..0.05, delta in 0.99f64..0.999, lg in 2.0f64..5.0) {
        let cfg = SolverConfig::default();
        let p = GameParams { n: 2, b, c, delta, l: 10f64.powf(lg), ..Default::default() };
        if let Ok(eq) = solve(Regime::AppOneType, &p, &cfg) {
            check_solution(&eq, &cfg)?;
            let gap = eq.omega_star() - eq.omega_star2();
            prop_assert!(gap > 0.0 && gap < b);
            let post = posterior_aggregate_all(&eq.profile).unwrap();
            prop_assert!((post[3] - p.pi_star).abs() <= 1e-8, "{}", post[3]);
            for a in 0..3 {
                prop_assert!(post[a] < p.pi_star, "{:?}", post);
            }
        }
    }

    #[test]
    fn aggregate_cutoff_ratio_matches_conditional_accusations(
        n in 2usize..=3, b in 0.1f64..1.0, c in 0.001f64..0.05, delta in 0.99f64..0.999, lg in 2.0f64..5.0,
    ) {
        let cfg = SolverConfig::default();
        let p = GameParams { n, b, c, delta, l: 10f64.powf(lg), ..Default::default() };
        if let Ok(eq) = solve(Regime::AppOneType, &p, &cfg) {
            let lhs = (eq.omega_star() - b - c).abs() / (eq.omega_star2() - c).abs();
            let rhs = others_accuse(&eq.profile, false) / others_accuse(&eq.profile, true);
            prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1.0), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn distinct_rule_is_additive(
        n in 2usize..=3, b in 1.0f64..3.0, c in 0.001f64..0.1, alpha in 0.001f64..0.5, delta in 0.99f64..0.999, lg in 2.0f64..5.0,
    ) {
        let cfg = SolverConfig::default();
        let p = GameParams { n, b, c, alpha, delta, l: 10f64.powf(lg), ..Default::default() };
        if let Ok(eq) = solve(Regime::DppLinear, &p, &cfg) {
            check_solution(&eq, &cfg)?;
            prop_assert!((eq.omega_star() - eq.omega_star2() - b).abs() <= 1e-10);
            let q = eq.profile.rule.by_count().unwrap();
            for (m, qm) in q.iter().enumerate() {
                prop_assert!((qm - m as f64 * q[1]).abs() <= 1e-15);
            }
            if n == 2 {
                prop_assert_eq!(eq.diagnostics.substitutes_index, Some(0.0));
            }
        }
    }

    #[test]
    fn solved_rows_are_verified_and_deterministic(lg in 2.0f64..4.0) {
        let cfg = SolverConfig::default();
        let p = GameParams { n: 2, b: 0.1, c: 0.02, delta: 0.999, ..Default::default() };
        let grid = [10f64.powf(lg), 10f64.powf(lg + 0.5)];
        let rows = sweep_l(&p, &grid, Regime::AppOneType, &cfg).unwrap();
        let again = sweep_l(&p, &grid, Regime::AppOneType, &cfg).unwrap();
        for (r, s) in rows.iter().zip(&again) {
            prop_assert_eq!(r.q.to_bits(), s.q.to_bits());
            if r.is_solved() {
                prop_assert!(r.residual <= cfg.tol);
            }
        }
    }

    #[test]
    fn solutions_round_trip_through_json(lg in 2.0f64..4.0) {
        let p = GameParams { n: 2, b: 0.1, c: 0.02, delta: 0.999, l: 10f64.powf(lg), ..Default::default() };
        if let Ok(eq) = solve(Regime::AppOneType, &p, &SolverConfig::default()) {
            let back: EquilibriumProfile = serde_json::from_str(&serde_json::to_string(&eq).unwrap()).unwrap();
            prop_assert_eq!(back, eq);
        }
    }
}
