//! Worked examples with their closed-form quantities, recomputed and
//! compared exactly.

use std::fmt;

use sbba_core::mechanisms::{mcafee, optimal_trade, sbba};
use sbba_core::sdm::{examples, sbba_sdm};
use sbba_core::{expected_gft, total_gft, Money, Order, Result, SingleMarketInstance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub label: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(name: impl Into<String>) -> Self {
        Report {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, label: impl Into<String>, expected: impl ToString, actual: impl ToString) {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        self.checks.push(Check {
            label: label.into(),
            ok: expected == actual,
            expected,
            actual,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        for c in &self.checks {
            let tag = if c.ok { "ok  " } else { "FAIL" };
            writeln!(f, "  {tag} {:<34} expected {:<10} got {}", c.label, c.expected, c.actual)?;
        }
        Ok(())
    }
}

/// `k - 1` sellers at 0 and one at `eps`; `k - 1` buyers at `budget` and
/// one at `budget - eps`, with exact rational parameters.
pub fn example1_instance(k: usize, budget: &Money, eps: &Money) -> SingleMarketInstance {
    let mut buyers = Vec::new();
    let mut sellers = Vec::new();
    for i in 1..k {
        buyers.push(Order::buy(format!("b{i}").as_str(), budget.clone()));
        sellers.push(Order::sell(format!("s{i}").as_str(), Money::zero()));
    }
    buyers.push(Order::buy(format!("b{k}").as_str(), budget - eps));
    sellers.push(Order::sell(format!("s{k}").as_str(), eps.clone()));
    SingleMarketInstance::new(buyers, sellers).expect("distinct ids, non-negative values")
}

/// McAfee's total and market gain against `(k-1)B` and `(k-1)2eps`, plus
/// SBBA's expected market gain `(k-1)(B - eps/k)` and its efficiency bound.
pub fn example1(k: usize, budget: &Money, eps: &Money) -> Result<Report> {
    let i = example1_instance(k, budget, eps);
    let km1 = Money::from_integer(k as i64 - 1);
    let kk = Money::from_integer(k as i64);
    let mut r = Report::new(format!("example1 (k = {k}, B = {budget}, eps = {eps})"));

    let mc = mcafee(&i);
    r.check("mcafee TGFT = (k-1)B", &km1 * budget, total_gft(&mc, &i)?);
    r.check("mcafee MGFT = (k-1)2eps", &km1 * Money::from_integer(2) * eps, expected_gft(&mc, &i)?);
    r.check(
        "mcafee surplus = (k-1)(B-2eps)",
        &km1 * (budget - Money::from_integer(2) * eps),
        mc.branches()[0].outcome.broker_surplus(),
    );

    let sb = sbba(&i);
    let mgft = expected_gft(&sb, &i)?;
    r.check("sbba MGFT = (k-1)(B-eps/k)", &km1 * (budget - eps / &kk), &mgft);
    let opt = optimal_trade(&i).gft;
    r.check("optimal GFT = kB-2eps", &kk * budget - Money::from_integer(2) * eps, &opt);
    let bound = &opt * (&km1 / &kk);
    r.check("sbba MGFT >= (1-1/k) opt", true, mgft >= bound);
    Ok(r)
}

pub fn sdm_main() -> Result<Report> {
    let sdm = examples::main_example();
    let out = sbba_sdm(&sdm)?;
    let mut r = Report::new("sdm-main");
    r.check("circulation cost", -100, out.circulation.total_cost());
    r.check("components", 1, out.partition.components().len());
    r.check("delta(1,2)", 4, describe(out.partition.delta(&"1".into(), &"2".into()).ok()));
    r.check("price market 1", 17, describe(out.prices.get(&"1".into())));
    r.check("price market 2", 21, describe(out.prices.get(&"2".into())));
    r.check("branches", 1, out.distribution.branches().len());
    r.check("deals", 6, out.distribution.branches()[0].outcome.deals());
    r.check("system surplus", 0, out.system_surplus(0, &sdm));
    Ok(r)
}

pub fn sdm_lottery() -> Result<Report> {
    let sdm = examples::lottery_example();
    let out = sbba_sdm(&sdm)?;
    let mut r = Report::new("sdm-appendix");
    let branches = out.distribution.branches();
    r.check("price market 1", 16, describe(out.prices.get(&"1".into())));
    r.check("price market 2", 20, describe(out.prices.get(&"2".into())));
    r.check("branches", 6, branches.len());
    r.check(
        "equiprobable",
        true,
        branches.iter().all(|b| b.probability == Money::ratio(1, 6)),
    );
    r.check(
        "deals per branch",
        "5",
        distinct(branches.iter().map(|b| b.outcome.deals().to_string())),
    );
    r.check(
        "bid-16 buyer excluded",
        "0",
        out.distribution.fill_probability(&"m1-b16".into()),
    );
    r.check(
        "system surplus per branch",
        "0",
        distinct((0..branches.len()).map(|i| out.system_surplus(i, &sdm).to_string())),
    );
    Ok(r)
}

fn describe(m: Option<&Money>) -> String {
    m.map_or_else(|| "none".into(), Money::to_string)
}

/// The distinct values in order, comma separated.
fn distinct(values: impl Iterator<Item = String>) -> String {
    let set: std::collections::BTreeSet<String> = values.collect();
    set.into_iter().collect::<Vec<_>>().join(",")
}
