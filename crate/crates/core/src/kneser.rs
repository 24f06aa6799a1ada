//! Pairwise verification of the periodicity theorem for small sumsets and
//! of the lower bound `|A+B| ≥ |A+H| + |B+H| − |H|` with `H` the period of
//! `A+B`, plus exhaustive and sampled scans over a group.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::set_algebra::{stabilizer_unchecked, sumset_unchecked};
use crate::subset::GroupSubset;

/// Default cap on the number of pairs an exhaustive scan may visit.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 1 << 24;

/// Violations kept verbatim in a report; the count is always exact.
pub const MAX_REPORTED_VIOLATIONS: usize = 64;

const SAMPLE_CHUNK: u64 = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KneserCertificate {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub sum_size: usize,
    /// `|A+B| ≤ |A| + |B| − 2`.
    pub hypothesis_met: bool,
    pub period: Vec<usize>,
    /// `|A+H| + |B+H| − |H|`, to be compared with `sum_size`.
    pub bound: usize,
    pub verdict: Verdict,
}

pub fn verify_kneser(group: &Group, a: &GroupSubset, b: &GroupSubset) -> Result<KneserCertificate> {
    a.check(group)?;
    b.check(group)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let sum = sumset_unchecked(group, a, b);
    let h = stabilizer_unchecked(group, &sum);
    let bound = sumset_unchecked(group, a, &h).card() + sumset_unchecked(group, b, &h).card() - h.card();
    let hypothesis_met = sum.card() + 2 <= a.card() + b.card();
    let ok = sum.card() >= bound && !(hypothesis_met && h.card() == 1);
    Ok(KneserCertificate {
        a: a.to_vec(),
        b: b.to_vec(),
        sum_size: sum.card(),
        hypothesis_met,
        period: h.to_vec(),
        bound,
        verdict: if ok { Verdict::Pass } else { Verdict::Violation },
    })
}

#[derive(Clone, Copy)]
struct PairOutcome {
    delta: i64,
    hypothesis_met: bool,
    periodic: bool,
    pass: bool,
}

#[inline]
fn mask_sum(group: &Group, a: u64, b: u64, full: u64) -> u64 {
    let (big, small) = if a.count_ones() >= b.count_ones() { (a, b) } else { (b, a) };
    let mut acc = 0u64;
    let mut rest = small;
    while rest != 0 {
        acc |= group.translate_mask(big, rest.trailing_zeros() as usize);
        if acc == full {
            break;
        }
        rest &= rest - 1;
    }
    acc
}

#[inline]
fn check_masks(group: &Group, a: u64, b: u64, full: u64) -> PairOutcome {
    let sum = mask_sum(group, a, b, full);
    let (na, nb, ns) = (a.count_ones() as i64, b.count_ones() as i64, sum.count_ones() as i64);
    let stab = if sum == full {
        full
    } else {
        let base = sum.trailing_zeros() as usize;
        let mut stab = 0u64;
        let mut rest = sum;
        while rest != 0 {
            let g = group.sub(rest.trailing_zeros() as usize, base);
            rest &= rest - 1;
            if group.translate_mask(sum, g) == sum {
                stab |= 1 << g;
            }
        }
        stab
    };
    let periodic = stab != 1;
    let hypothesis_met = ns + 2 <= na + nb;
    let bound = if periodic {
        let nh = stab.count_ones() as i64;
        mask_sum(group, a, stab, full).count_ones() as i64 + mask_sum(group, b, stab, full).count_ones() as i64 - nh
    } else {
        na + nb - 1
    };
    PairOutcome {
        delta: ns - na - nb,
        hypothesis_met,
        periodic,
        pass: ns >= bound && (periodic || !hypothesis_met),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub group: String,
    pub mode: ScanMode,
    pub pairs_tested: u64,
    pub violation_count: u64,
    pub violations: Vec<KneserCertificate>,
    /// `|A+B| − |A| − |B|` to number of pairs.
    pub histogram: BTreeMap<i64, u64>,
    pub branch_coverage: BTreeMap<String, u64>,
    pub seed: Option<u64>,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The histogram as `delta,count` rows.
    pub fn histogram_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvariantViolated(format!("csv: {e}"));
        w.write_record(["delta", "count"]).map_err(io)?;
        for (d, c) in &self.histogram {
            w.write_record([d.to_string(), c.to_string()]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvariantViolated(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

#[derive(Default)]
struct Tally {
    pairs: u64,
    hypothesis_met: u64,
    periodic: u64,
    histogram: BTreeMap<i64, u64>,
    violations: Vec<(GroupSubset, GroupSubset)>,
    violation_count: u64,
}

impl Tally {
    fn record(&mut self, o: PairOutcome, pair: impl FnOnce() -> (GroupSubset, GroupSubset)) {
        self.pairs += 1;
        self.hypothesis_met += o.hypothesis_met as u64;
        self.periodic += o.periodic as u64;
        *self.histogram.entry(o.delta).or_default() += 1;
        if !o.pass {
            self.violation_count += 1;
            if self.violations.len() < MAX_REPORTED_VIOLATIONS {
                self.violations.push(pair());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.pairs += other.pairs;
        self.hypothesis_met += other.hypothesis_met;
        self.periodic += other.periodic;
        for (d, c) in other.histogram {
            *self.histogram.entry(d).or_default() += c;
        }
        self.violation_count += other.violation_count;
        self.violations.extend(other.violations);
        self
    }

    fn into_report(mut self, group: &Group, mode: ScanMode, seed: Option<u64>) -> Result<ScanReport> {
        self.violations.sort();
        self.violations.truncate(MAX_REPORTED_VIOLATIONS);
        let violations = self
            .violations
            .iter()
            .map(|(a, b)| verify_kneser(group, a, b))
            .collect::<Result<Vec<_>>>()?;
        let branch_coverage = BTreeMap::from([
            ("hypothesis_met".to_string(), self.hypothesis_met),
            ("hypothesis_unmet".to_string(), self.pairs - self.hypothesis_met),
            ("periodic_sum".to_string(), self.periodic),
            ("aperiodic_sum".to_string(), self.pairs - self.periodic),
        ]);
        Ok(ScanReport {
            group: group.label().to_string(),
            mode,
            pairs_tested: self.pairs,
            violation_count: self.violation_count,
            violations,
            histogram: self.histogram,
            branch_coverage,
            seed,
        })
    }
}

/// Number of ordered pairs of nonempty subsets, saturating.
pub fn exhaustive_pair_count(order: usize) -> u128 {
    if order >= 64 {
        return u128::MAX;
    }
    let sets = (1u128 << order) - 1;
    sets * sets
}

/// Verifies every ordered pair of nonempty subsets.
pub fn exhaustive_scan(group: &Group, budget: u128) -> Result<ScanReport> {
    let needed = exhaustive_pair_count(group.order());
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let n = group.order();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let tally = (1..=full)
        .into_par_iter()
        .fold(Tally::default, |mut acc, a| {
            for b in 1..=full {
                let o = check_masks(group, a, b, full);
                acc.record(o, || {
                    (
                        GroupSubset::from_mask_unchecked(group, a),
                        GroupSubset::from_mask_unchecked(group, b),
                    )
                });
            }
            acc
        })
        .reduce(Tally::default, Tally::merge);
    tally.into_report(group, ScanMode::Exhaustive, None)
}

fn random_subset(group: &Group, rng: &mut ChaCha8Rng) -> GroupSubset {
    let n = group.order();
    let size = rng.gen_range(1..=n);
    GroupSubset::from_indices(group, sample(rng, n, size)).expect("in range")
}

/// Verifies `samples` random pairs. Set sizes are uniform in `1..=|G|` and
/// the members uniform given the size. Sample `i` depends only on `seed`
/// and `i`, never on the thread count.
pub fn sampled_scan(group: &Group, samples: u64, seed: u64) -> Result<ScanReport> {
    let n = group.order();
    let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut acc = Tally::default();
            let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            for _ in 0..count {
                let a = random_subset(group, &mut rng);
                let b = random_subset(group, &mut rng);
                if n <= 64 {
                    let o = check_masks(group, a.as_mask().unwrap(), b.as_mask().unwrap(), full);
                    acc.record(o, || (a, b));
                } else {
                    let cert = verify_kneser(group, &a, &b)?;
                    let o = PairOutcome {
                        delta: cert.sum_size as i64 - a.card() as i64 - b.card() as i64,
                        hypothesis_met: cert.hypothesis_met,
                        periodic: cert.period.len() > 1,
                        pass: cert.verdict == Verdict::Pass,
                    };
                    acc.record(o, || (a, b));
                }
            }
            Ok(acc)
        })
        .try_reduce(Tally::default, |x, y| Ok(x.merge(y)))?;
    tally.into_report(group, ScanMode::Sampled, Some(seed))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub exhaustive_budget: u128,
    /// Sample count used when the exhaustive budget is exceeded, or always
    /// when `force_sampling` is set.
    pub samples: u64,
    pub seed: u64,
    pub force_sampling: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            exhaustive_budget: DEFAULT_EXHAUSTIVE_BUDGET,
            samples: 1_000_000,
            seed: 0,
            force_sampling: false,
        }
    }
}

/// Exhaustive when the budget allows and sampling is not forced, sampled
/// otherwise.
pub fn scan(group: &Group, config: &ScanConfig) -> Result<ScanReport> {
    if !config.force_sampling && exhaustive_pair_count(group.order()) <= config.exhaustive_budget {
        exhaustive_scan(group, config.exhaustive_budget)
    } else {
        sampled_scan(group, config.samples, config.seed)
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::PreconditionUnmet(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use proptest::prelude::*;

    fn set(g: &Group, xs: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g, xs.iter().copied()).unwrap()
    }

    #[test]
    fn certificate_examples() {
        let z4 = Group::cyclic(4).unwrap();
        let c = verify_kneser(&z4, &set(&z4, &[0, 2]), &set(&z4, &[0, 2])).unwrap();
        assert_eq!((c.sum_size, c.hypothesis_met, c.bound), (2, true, 2));
        assert_eq!(c.period, vec![0, 2]);
        assert_eq!(c.verdict, Verdict::Pass);

        let z5 = Group::cyclic(5).unwrap();
        let c = verify_kneser(&z5, &set(&z5, &[0, 1]), &set(&z5, &[0, 1])).unwrap();
        assert_eq!((c.sum_size, c.hypothesis_met, c.bound), (3, false, 3));
        assert_eq!(c.period, vec![0]);

        let z6 = Group::cyclic(6).unwrap();
        let c = verify_kneser(&z6, &set(&z6, &[0, 3]), &set(&z6, &[0, 2, 3, 5])).unwrap();
        assert_eq!(c.sum_size, 4);
        assert!(c.hypothesis_met);
        assert!(c.period.contains(&3));
        assert_eq!(c.verdict, Verdict::Pass);

        assert_eq!(
            verify_kneser(&z6, &GroupSubset::empty(&z6), &set(&z6, &[0])),
            Err(Error::EmptySet)
        );
        assert_eq!(verify_kneser(&z6, &set(&z5, &[0]), &set(&z6, &[0])), Err(Error::GroupMismatch));
    }

    #[test]
    fn exhaustive_small_groups() {
        let z4 = Group::cyclic(4).unwrap();
        let r = exhaustive_scan(&z4, DEFAULT_EXHAUSTIVE_BUDGET).unwrap();
        assert_eq!(r.pairs_tested, 225);
        assert_eq!(r.violation_count, 0);
        assert_eq!(r.histogram.values().sum::<u64>(), 225);

        let z222 = Group::new(&GroupSpec::new(vec![2, 2, 2]).unwrap()).unwrap();
        let r = exhaustive_scan(&z222, DEFAULT_EXHAUSTIVE_BUDGET).unwrap();
        assert_eq!(r.pairs_tested, 255 * 255);
        assert_eq!(r.violation_count, 0);
    }

    #[test]
    fn budget_is_enforced() {
        let z13 = Group::cyclic(13).unwrap();
        assert!(matches!(
            exhaustive_scan(&z13, DEFAULT_EXHAUSTIVE_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
        let cfg = ScanConfig {
            samples: 5000,
            seed: 3,
            ..ScanConfig::default()
        };
        let r = scan(&z13, &cfg).unwrap();
        assert_eq!(r.mode, ScanMode::Sampled);
        assert_eq!(r.pairs_tested, 5000);
        assert_eq!(r.seed, Some(3));
        assert_eq!(r.violation_count, 0);
    }

    #[test]
    fn sampling_is_independent_of_workers() {
        let g = Group::new(&GroupSpec::new(vec![4, 20]).unwrap()).unwrap();
        let one = with_workers(1, || sampled_scan(&g, 9000, 42)).unwrap().unwrap();
        let four = with_workers(4, || sampled_scan(&g, 9000, 42)).unwrap().unwrap();
        assert_eq!(one.to_json(), four.to_json());
        assert_eq!(one.violation_count, 0);
        let other = sampled_scan(&g, 9000, 43).unwrap();
        assert_ne!(one.histogram, other.histogram);
    }

    #[test]
    fn csv_histogram() {
        let z3 = Group::cyclic(3).unwrap();
        let r = exhaustive_scan(&z3, DEFAULT_EXHAUSTIVE_BUDGET).unwrap();
        let csv = r.histogram_csv().unwrap();
        assert!(csv.starts_with("delta,count\n"));
        let total: u64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, 49);
    }

    proptest! {
        #[test]
        fn mask_path_matches_certificate(n in 2usize..=20, a in 1u64..(1 << 20), b in 1u64..(1 << 20)) {
            let g = Group::cyclic(n).unwrap();
            let full = (1u64 << n) - 1;
            let (a, b) = (a & full, b & full);
            prop_assume!(a != 0 && b != 0);
            let o = check_masks(&g, a, b, full);
            let cert = verify_kneser(&g, &GroupSubset::from_mask(&g, a).unwrap(), &GroupSubset::from_mask(&g, b).unwrap()).unwrap();
            prop_assert_eq!(o.pass, cert.verdict == Verdict::Pass);
            prop_assert_eq!(o.hypothesis_met, cert.hypothesis_met);
            prop_assert_eq!(o.periodic, cert.period.len() > 1);
            prop_assert_eq!(o.delta, cert.sum_size as i64 - a.count_ones() as i64 - b.count_ones() as i64);
        }
    }
}
