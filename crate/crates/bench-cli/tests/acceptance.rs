//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sbba_bench::generate::{with_breakeven, SdmSpec};
use sbba_bench::reproduce::{example1_instance, sdm_lottery, sdm_main};
use sbba_bench::suite::{sdm_suite, single_suite};
use sbba_core::audit::{
    brute_force_sdm_optimum, conservation_audit, ir_audit, truthfulness_audit, DeterministicExclusion,
};
use sbba_core::mechanisms::{mcafee, optimal_trade, sbba, sbba_dual, McAfee, Mechanism, Sbba, SbbaDual, Vcg};
use sbba_core::sdm::{build_flow_network, min_cost_circulation, sbba_sdm, verify_prices, SbbaSdm, SdmInstance};
use sbba_core::{expected_gft, total_gft, Money, OutcomeDistribution, SingleMarketInstance};

const SEED: u64 = 20_240_601;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

struct Suites {
    single: Vec<SingleMarketInstance>,
    breakeven: Vec<(usize, SingleMarketInstance)>,
    sdm: Vec<SdmInstance>,
}

fn suites() -> Suites {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let single = single_suite(&mut rng, 200, 6, 0, 20).expect("valid suite parameters");
    let mut breakeven = Vec::new();
    for k in 2..=10 {
        for _ in 0..1000 {
            breakeven.push((k, with_breakeven(&mut rng, k, 0, 100).expect("valid parameters")));
        }
    }
    let spec = SdmSpec { markets: 3, max_traders_per_market: 4, ..SdmSpec::default() };
    let sdm = sdm_suite(&mut rng, 200, &spec).expect("valid suite parameters");
    Suites { single, breakeven, sdm }
}

fn example1_exactness() -> Outcome {
    let budget = Money::from_integer(1000);
    let eps = Money::from_integer(1);
    for k in 2..=50usize {
        let i = example1_instance(k, &budget, &eps);
        let d = mcafee(&i);
        let km1 = Money::from_integer(k as i64 - 1);
        let tgft = total_gft(&d, &i).expect("own traders");
        let mgft = expected_gft(&d, &i).expect("own traders");
        if tgft != &km1 * &budget {
            return fail(format!("k = {k}: TGFT {tgft}"));
        }
        if mgft != &km1 * Money::from_integer(2) * &eps {
            return fail(format!("k = {k}: MGFT {mgft}"));
        }
    }
    pass("k = 2..50, B = 1000, eps = 1")
}

fn efficiency_bound(s: &Suites) -> Outcome {
    for (n, (k, i)) in s.breakeven.iter().enumerate() {
        let opt = optimal_trade(i);
        if opt.k != *k {
            return fail(format!("instance {n}: generated k {} != {k}", opt.k));
        }
        let gft = expected_gft(&sbba(i), i).expect("own traders");
        let bound = &opt.gft * Money::ratio(*k as i64 - 1, *k as i64);
        if gft < bound {
            return fail(format!("instance {n} (k = {k}): {gft} < {bound}"));
        }
    }
    pass(format!("{} instances, k = 2..10", s.breakeven.len()))
}

fn zero_surplus(d: &OutcomeDistribution) -> bool {
    d.branches().iter().all(|b| b.outcome.broker_surplus().is_zero())
}

fn budget_balance(s: &Suites) -> Outcome {
    let mut branches = 0;
    let all_single = s.single.iter().chain(s.breakeven.iter().map(|(_, i)| i));
    for (n, i) in all_single.enumerate() {
        for (name, d) in [("sbba", sbba(i)), ("sbba_dual", sbba_dual(i))] {
            branches += d.branches().len();
            if !zero_surplus(&d) {
                return fail(format!("{name}, single instance {n}: nonzero broker surplus"));
            }
        }
    }
    for (n, i) in s.sdm.iter().enumerate() {
        let out = sbba_sdm(i).expect("valid instance");
        for b in 0..out.distribution.branches().len() {
            branches += 1;
            let surplus = out.system_surplus(b, i);
            if !surplus.is_zero() {
                return fail(format!("sbba_sdm, instance {n}, branch {b}: system surplus {surplus}"));
            }
        }
        let v = conservation_audit(i, &out);
        if let Some(v) = v.first() {
            return fail(format!("sbba_sdm, instance {n}: {v:?}"));
        }
    }
    pass(format!("{branches} branches"))
}

fn violations(mech: &impl Mechanism, suite: &[SingleMarketInstance]) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for i in suite {
        let reports = truthfulness_audit(mech, i).expect("valid instance");
        checked += reports.len();
        bad += reports.iter().filter(|r| r.violation).count();
    }
    (checked, bad)
}

fn truthfulness(s: &Suites) -> Outcome {
    let mut checked = 0;
    let mut report = Vec::new();
    let mut ok = true;
    let runs = [
        ("sbba", violations(&Sbba, &s.single)),
        ("sbba_dual", violations(&SbbaDual, &s.single)),
        ("mcafee", violations(&McAfee, &s.single)),
        ("vcg", violations(&Vcg, &s.single)),
    ];
    for (name, (c, bad)) in runs {
        checked += c;
        ok &= bad == 0;
        report.push(format!("{name} {bad}"));
    }
    let (_, control) = violations(&DeterministicExclusion, &s.single);
    ok &= control >= 1;
    report.push(format!("control {control}"));
    let detail = format!("{checked} deviations; violations: {}", report.join(", "));
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn worked_examples() -> Outcome {
    let mut failed = Vec::new();
    for r in [sdm_main(), sdm_lottery()] {
        match r {
            Ok(r) if r.passed() => {}
            Ok(r) => failed.push(r.to_string()),
            Err(e) => failed.push(e.to_string()),
        }
    }
    if failed.is_empty() {
        pass("sdm-main and sdm-appendix")
    } else {
        fail(failed.join("; "))
    }
}

fn flow_oracle(s: &Suites) -> Outcome {
    for (n, i) in s.sdm.iter().enumerate() {
        let flow = -min_cost_circulation(&build_flow_network(i)).total_cost().clone();
        match brute_force_sdm_optimum(i) {
            Ok(best) if best == flow => {}
            Ok(best) => return fail(format!("instance {n}: flow {flow} vs exhaustive {best}")),
            Err(e) => return fail(format!("instance {n}: {e}")),
        }
    }
    pass(format!("{} instances", s.sdm.len()))
}

fn price_validity(s: &Suites) -> Outcome {
    let mut priced = 0;
    for (n, i) in s.sdm.iter().enumerate() {
        let out = sbba_sdm(i).expect("valid instance");
        priced += out.prices.len();
        if let Some(v) = verify_prices(&out.prices, &out.partition).first() {
            return fail(format!("instance {n}: {v:?}"));
        }
    }
    pass(format!("{} instances, {priced} market prices", s.sdm.len()))
}

fn individual_rationality(s: &Suites) -> Outcome {
    let mechs: [&dyn Mechanism; 4] = [&Sbba, &SbbaDual, &McAfee, &Vcg];
    let all_single = || s.single.iter().chain(s.breakeven.iter().map(|(_, i)| i));
    let mut runs = 0;
    for m in mechs {
        for (n, i) in all_single().enumerate() {
            runs += 1;
            let d = m.run(i).expect("valid instance");
            if let Some(v) = ir_audit(&d, i).first() {
                return fail(format!("{}, instance {n}: {v:?}", m.name()));
            }
        }
    }
    for (n, i) in s.sdm.iter().enumerate() {
        runs += 1;
        let d = SbbaSdm.run(i).expect("valid instance");
        if let Some(v) = ir_audit(&d, i).first() {
            return fail(format!("sbba_sdm, instance {n}: {v:?}"));
        }
    }
    pass(format!("{runs} mechanism runs"))
}

fn main() -> ExitCode {
    let t = Instant::now();
    let s = suites();
    println!("suites built in {:.2?}", t.elapsed());

    type Criterion<'a> = (&'a str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 example exactness", Some(Duration::from_secs(1)), Box::new(example1_exactness)),
        ("2 sbba efficiency bound", Some(Duration::from_secs(10)), Box::new(|| efficiency_bound(&s))),
        ("3 strong budget balance", None, Box::new(|| budget_balance(&s))),
        ("4 truthfulness audits", Some(Duration::from_secs(60)), Box::new(|| truthfulness(&s))),
        ("5 sdm worked examples", None, Box::new(worked_examples)),
        ("6 flow-oracle equivalence", Some(Duration::from_secs(120)), Box::new(|| flow_oracle(&s))),
        ("7 price validity", None, Box::new(|| price_validity(&s))),
        ("8 individual rationality", None, Box::new(|| individual_rationality(&s))),
    ];

    let mut all = true;
    for (name, limit, run) in criteria {
        let t = Instant::now();
        let mut out = run();
        let took = t.elapsed();
        if let Some(limit) = limit {
            if took >= limit {
                out.ok = false;
                out.detail.push_str(&format!("; over the {limit:?} limit"));
            }
        }
        all &= out.ok;
        let verdict = if out.ok { "PASS" } else { "FAIL" };
        println!("{verdict} {name} ({took:.2?}): {}", out.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
