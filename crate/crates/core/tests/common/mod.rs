//! Shared helpers for the integration suites: fixture loading, a tiny
//! generator-independent RNG, and an independently coded pooling oracle
//! (exact rational arithmetic for the Mantel-Haenszel path).

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use outcome_eval::evidence::{
    parse_mapping, parse_qrels, parse_review_xml, DichotomousArms, EffectMeasure, Qrels, Review,
    StudyPublicationMap,
};
use outcome_eval::experiments::Corpus;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load_fixture_reviews() -> Vec<Review> {
    let mut paths: Vec<PathBuf> = fs::read_dir(fixtures_dir().join("corpus"))
        .expect("fixture corpus dir")
        .map(|e| e.expect("dir entry").path())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| parse_review_xml(&fs::read(p).expect("fixture file")).expect("fixture parses"))
        .collect()
}

pub fn load_fixture_corpus() -> Corpus {
    Corpus::new(load_fixture_reviews())
}

pub fn load_fixture_mapping() -> StudyPublicationMap {
    parse_mapping(&fs::read(fixtures_dir().join("mapping.csv")).expect("fixture file"))
        .expect("fixture parses")
        .map
}

pub fn load_fixture_qrels() -> Qrels {
    parse_qrels(&fs::read(fixtures_dir().join("qrels/fulltext.qrels")).expect("fixture file"))
        .expect("fixture parses")
}

/// Minimal LCG (Numerical Recipes constants); deliberately a different
/// generator family than the library's SplitMix stream.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        (self.next_u64() >> 11) % bound.max(1)
    }

    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

struct Cells {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
}

fn corrected(arms: &DichotomousArms) -> Cells {
    let (a, b, c, d) = (
        arms.events_exp as i64,
        (arms.total_exp - arms.events_exp) as i64,
        arms.events_ctrl as i64,
        (arms.total_ctrl - arms.events_ctrl) as i64,
    );
    let bump = a == 0 || b == 0 || c == 0 || d == 0;
    let lift = |v: i64| {
        if bump {
            rat(v) + half()
        } else {
            rat(v)
        }
    };
    Cells {
        a: lift(a),
        b: lift(b),
        c: lift(c),
        d: lift(d),
    }
}

/// Exact-rational Mantel-Haenszel pooled estimate, or None when not
/// estimable. Also returns the exact normalized per-study weights.
pub fn mh_oracle(
    rows: &[(String, DichotomousArms)],
    measure: EffectMeasure,
) -> Option<(f64, Vec<(String, f64)>)> {
    let usable: Vec<&(String, DichotomousArms)> = rows
        .iter()
        .filter(|(_, arms)| arms.total_exp > 0 && arms.total_ctrl > 0)
        .filter(|(_, arms)| {
            !(matches!(
                measure,
                EffectMeasure::RiskRatio | EffectMeasure::OddsRatio
            ) && arms.events_exp == 0
                && arms.events_ctrl == 0)
        })
        .collect();
    if usable.is_empty() {
        return None;
    }
    let mut num = BigRational::zero();
    let mut den = BigRational::zero();
    let mut raw: Vec<(String, BigRational)> = Vec::new();
    for (study, arms) in &usable {
        match measure {
            EffectMeasure::RiskRatio => {
                let cells = corrected(arms);
                let n1 = &cells.a + &cells.b;
                let n2 = &cells.c + &cells.d;
                let n = &n1 + &n2;
                num += &cells.a * &n2 / &n;
                let w = &cells.c * &n1 / &n;
                den += &w;
                raw.push((study.clone(), w));
            }
            EffectMeasure::OddsRatio => {
                let cells = corrected(arms);
                let n = &cells.a + &cells.b + &cells.c + &cells.d;
                num += &cells.a * &cells.d / &n;
                let w = &cells.b * &cells.c / &n;
                den += &w;
                raw.push((study.clone(), w));
            }
            EffectMeasure::RiskDifference => {
                let a = rat(arms.events_exp as i64);
                let c = rat(arms.events_ctrl as i64);
                let n1 = rat(arms.total_exp as i64);
                let n2 = rat(arms.total_ctrl as i64);
                let n = &n1 + &n2;
                let w = &n1 * &n2 / &n;
                num += &w * (&a / &n1 - &c / &n2);
                den += &w;
                raw.push((study.clone(), w));
            }
            _ => unreachable!("dichotomous measures only"),
        }
    }
    if den.is_zero() {
        return None;
    }
    let estimate = &num / &den;
    if matches!(
        measure,
        EffectMeasure::RiskRatio | EffectMeasure::OddsRatio
    ) && estimate <= BigRational::zero()
    {
        return None;
    }
    let weights = raw
        .into_iter()
        .map(|(s, w)| (s, (w / &den).to_f64().expect("weight fits in f64")))
        .collect();
    Some((estimate.to_f64().expect("estimate fits in f64"), weights))
}

pub fn assert_rel_close(got: f64, want: f64, tol: f64, what: &str) {
    let denom = want.abs().max(1e-300);
    let rel = (got - want).abs() / denom;
    assert!(
        rel <= tol || (got - want).abs() <= 1e-14,
        "{what}: got {got}, want {want} (rel {rel:e})"
    );
}
