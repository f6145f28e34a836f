use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::{Data, Median};

use super::ContractViolation;
use crate::testgen::Provenance;

/// `100 * killed / total`, or `None` when there are no mutants.
pub fn kill_rate(killed: usize, total: usize) -> Result<Option<f64>, ContractViolation> {
    if killed > total {
        return Err(ContractViolation(format!("{killed} killed out of {total} mutants")));
    }
    Ok((total > 0).then(|| 100.0 * killed as f64 / total as f64))
}

/// Renders a kill rate with two decimals, or `n/a`.
pub fn format_rate(rate: Option<f64>) -> String {
    rate.map_or_else(|| "n/a".to_string(), |r| format!("{r:.2}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-tailed.
    pub p: f64,
    pub df: f64,
    /// Set when the differences have zero spread and `p` follows a convention.
    pub degenerate: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Paired t-test on `a - b`.
///
/// All-zero differences give `p = 1`; constant non-zero differences give an
/// infinite `t` and `p = 0`. Both are flagged as degenerate.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, ContractViolation> {
    if a.len() != b.len() {
        return Err(ContractViolation(format!("paired samples differ in length ({} vs {})", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(ContractViolation("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let df = n - 1.0;
    let md = mean(&d);
    let sd = sample_sd(&d);
    if sd == 0.0 {
        return Ok(if md == 0.0 {
            TTest { t: 0.0, p: 1.0, df, degenerate: true }
        } else {
            TTest {
                t: md.signum() * f64::INFINITY,
                p: 0.0,
                df,
                degenerate: true,
            }
        });
    }
    let t = md / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(TTest { t, p, df, degenerate: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub total: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    /// Number of functions where the weak-mutation suite is smaller, equal or
    /// larger than this strategy's suite.
    pub vs_weak_mutation: Option<(usize, usize, usize)>,
    /// Paired t-test of weak-mutation sizes against this strategy's sizes.
    pub t_test: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub functions: usize,
    pub strategies: BTreeMap<Provenance, SizeStats>,
}

/// Suite-size statistics from per-function sizes, all strategies listing
/// the same functions in the same order.
pub fn suite_size_stats(sizes: &BTreeMap<Provenance, Vec<f64>>) -> Result<StatsSummary, ContractViolation> {
    let n = sizes.values().next().map_or(0, |v| v.len());
    if sizes.values().any(|v| v.len() != n) {
        return Err(ContractViolation("strategies cover different numbers of functions".into()));
    }
    let wm = sizes.get(&Provenance::WeakMutation);
    let mut out = BTreeMap::new();
    for (s, xs) in sizes {
        let total = xs.iter().sum::<f64>();
        let stats = SizeStats {
            total: total as usize,
            mean: if n > 0 { total / n as f64 } else { 0.0 },
            median: if n > 0 { Data::new(xs.clone()).median() } else { 0.0 },
            sd: if n > 1 { sample_sd(xs) } else { 0.0 },
            vs_weak_mutation: wm.filter(|_| *s != Provenance::WeakMutation).map(|w| {
                let mut c = (0, 0, 0);
                for (a, b) in w.iter().zip(xs) {
                    match a.partial_cmp(b).expect("finite sizes") {
                        std::cmp::Ordering::Less => c.0 += 1,
                        std::cmp::Ordering::Equal => c.1 += 1,
                        std::cmp::Ordering::Greater => c.2 += 1,
                    }
                }
                c
            }),
            t_test: match wm {
                Some(w) if *s != Provenance::WeakMutation && n >= 2 => Some(paired_t_test(w, xs)?),
                _ => None,
            },
        };
        out.insert(*s, stats);
    }
    Ok(StatsSummary { functions: n, strategies: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        assert_eq!(kill_rate(0, 50).unwrap(), Some(0.0));
        let r = kill_rate(7, 11).unwrap().unwrap();
        assert!((r - 63.636363).abs() < 1e-4);
        assert_eq!(kill_rate(0, 0).unwrap(), None);
        assert_eq!(format_rate(None), "n/a");
        assert_eq!(format_rate(Some(r)), "63.64");
        assert!(kill_rate(3, 2).is_err());
    }

    #[test]
    fn degenerate_tests() {
        let a = [1.0, 2.0, 3.0];
        let same = paired_t_test(&a, &a).unwrap();
        assert_eq!((same.p, same.degenerate), (1.0, true));
        let shifted = paired_t_test(&[2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((shifted.p, shifted.degenerate), (0.0, true));
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn t_statistic_by_hand() {
        // d = [1, 2, 3]: mean 2, sd 1, t = 2 / (1 / sqrt 3).
        let r = paired_t_test(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.df, 2.0);
        // Two-tailed p for t = 2*sqrt(3) with 2 df: 1 - t / sqrt(t^2 + 2).
        let exact = 1.0 - r.t / (r.t * r.t + 2.0).sqrt();
        assert!((r.p - exact).abs() < 1e-10, "{} vs {exact}", r.p);
    }

    #[test]
    fn uniform_sizes() {
        let mut m = BTreeMap::new();
        m.insert(Provenance::Random, vec![10.0; 5]);
        m.insert(Provenance::WeakMutation, vec![1.0; 5]);
        let s = suite_size_stats(&m).unwrap();
        let r = &s.strategies[&Provenance::Random];
        assert_eq!((r.total, r.mean, r.median, r.sd), (50, 10.0, 10.0, 0.0));
        assert_eq!(r.vs_weak_mutation, Some((5, 0, 0)));
        assert!(r.t_test.unwrap().degenerate);
        assert!(s.strategies[&Provenance::WeakMutation].t_test.is_none());
    }
}
