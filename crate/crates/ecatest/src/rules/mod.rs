//! Per-rule tester metadata: final sets, predictors and constructors.

pub mod construct;
mod meta;
mod pattern;

use std::sync::Arc;

pub use meta::{
    FinalPrediction, Finality, FinalizeFn, ImageModel, MetaBuilder, PlantFn, PlantRequest, RuleMeta, Side,
    TesterKind,
};
pub use pattern::{Parity, Pattern};

use crate::{Rule, RuleError, RuleName};

/// Flips every cell of `tau` when `flip` holds.
fn flip_if(tau: Pattern, flip: bool) -> Pattern {
    if flip {
        tau.complement()
    } else {
        tau
    }
}

const THRESHOLD_FINAL: [&str; 6] = ["111", "110", "011", "000", "001", "100"];
const HOMOGENEOUS_FINAL: [&str; 6] = ["001", "010", "011", "100", "101", "110"];

fn or_meta() -> RuleMeta {
    MetaBuilder::new("or", Rule::OR, 0)
        .final_strs(&["1"])
        .prediction(false, false)
        .transport(|tau, _, _| tau)
        .finalize(Arc::new(construct::fill_interval(true)))
        .plant(Arc::new(construct::plant_adjacent))
        .image(ImageModel::Runs { target: true })
        .build()
        .expect("or metadata is valid")
}

fn maj_meta() -> RuleMeta {
    MetaBuilder::new("maj", Rule::MAJ, 1)
        .final_strs(&THRESHOLD_FINAL)
        .prediction(false, false)
        .transport(|tau, dt, dd| flip_if(tau, dt.bit() ^ Parity::of_signed(dd).bit()))
        .finalize(Arc::new(construct::copy_nearest(false)))
        .plant(Arc::new(construct::plant_alternating))
        .image(ImageModel::Gaps { marker_is_change: true })
        .build()
        .expect("maj metadata is valid")
}

fn min_meta() -> RuleMeta {
    // Alternating regions are fixed points of MIN, so only the displacement
    // matters; final regions flip every step.
    MetaBuilder::new("min", Rule::MIN, 1)
        .final_strs(&THRESHOLD_FINAL)
        .prediction(true, false)
        .transport(|tau, _, dd| flip_if(tau, Parity::of_signed(dd).bit()))
        .finalize(Arc::new(construct::copy_nearest(false)))
        .plant(Arc::new(construct::plant_alternating))
        .image(ImageModel::Gaps { marker_is_change: true })
        .build()
        .expect("min metadata is valid")
}

fn fih_meta() -> RuleMeta {
    MetaBuilder::new("fih", Rule::FIH, 1)
        .final_strs(&HOMOGENEOUS_FINAL)
        .prediction(false, true)
        .transport(|tau, dt, _| flip_if(tau, dt.bit()))
        .finalize(Arc::new(construct::copy_nearest(true)))
        .plant(Arc::new(construct::plant_homogeneous))
        .image(ImageModel::Gaps { marker_is_change: false })
        .build()
        .expect("fih metadata is valid")
}

fn fuh_meta() -> RuleMeta {
    MetaBuilder::new("fuh", Rule::FUH, 1)
        .final_strs(&HOMOGENEOUS_FINAL)
        .prediction(true, true)
        .transport(|tau, _, _| tau)
        .finalize(Arc::new(construct::copy_nearest(true)))
        .plant(Arc::new(construct::plant_homogeneous))
        .image(ImageModel::Gaps { marker_is_change: false })
        .build()
        .expect("fuh metadata is valid")
}

/// Metadata for the rules handled by the meta-tester.
pub fn builtin_meta(name: RuleName) -> Result<RuleMeta, RuleError> {
    match name {
        RuleName::Or => Ok(or_meta()),
        RuleName::And => Ok(or_meta().complement("and")),
        RuleName::Maj => Ok(maj_meta()),
        RuleName::Min => Ok(min_meta()),
        RuleName::Fih => Ok(fih_meta()),
        RuleName::Fuh => Ok(fuh_meta()),
        other => Err(RuleError::NoMetadata(other.to_string())),
    }
}

pub fn builtin_meta_by_str(name: &str) -> Result<RuleMeta, RuleError> {
    builtin_meta(name.parse()?)
}

/// Names with full metadata.
pub const META_RULES: [RuleName; 6] = [
    RuleName::Or,
    RuleName::And,
    RuleName::Maj,
    RuleName::Min,
    RuleName::Fih,
    RuleName::Fuh,
];

/// Rules that settle after one step and get a dedicated tester.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrivialRule {
    All1,
    All0,
    Nor,
    Nand,
}

impl TrivialRule {
    pub const ALL: [TrivialRule; 4] = [TrivialRule::All1, TrivialRule::All0, TrivialRule::Nor, TrivialRule::Nand];

    pub fn rule(self) -> Rule {
        match self {
            TrivialRule::All1 => Rule::ALL1,
            TrivialRule::All0 => Rule::ALL0,
            TrivialRule::Nor => Rule::NOR,
            TrivialRule::Nand => Rule::NAND,
        }
    }

    pub fn name(self) -> RuleName {
        match self {
            TrivialRule::All1 => RuleName::All1,
            TrivialRule::All0 => RuleName::All0,
            TrivialRule::Nor => RuleName::Nor,
            TrivialRule::Nand => RuleName::Nand,
        }
    }

    /// `Some(b)` for the constant rules, whose rows after the first are all `b`.
    pub fn constant(self) -> Option<bool> {
        match self {
            TrivialRule::All1 => Some(true),
            TrivialRule::All0 => Some(false),
            _ => None,
        }
    }
}

pub fn trivial_rule(name: RuleName) -> Result<TrivialRule, RuleError> {
    match name {
        RuleName::All1 => Ok(TrivialRule::All1),
        RuleName::All0 => Ok(TrivialRule::All0),
        RuleName::Nor => Ok(TrivialRule::Nor),
        RuleName::Nand => Ok(TrivialRule::Nand),
        other => Err(RuleError::UnknownRule(format!("{other} is not a trivial rule"))),
    }
}

/// Either flavor of tester target.
#[derive(Clone, Debug)]
pub enum TestTarget {
    Meta(RuleMeta),
    Trivial(TrivialRule),
}

impl TestTarget {
    pub fn from_name(name: RuleName) -> TestTarget {
        match trivial_rule(name) {
            Ok(t) => TestTarget::Trivial(t),
            Err(_) => TestTarget::Meta(builtin_meta(name).expect("every non-trivial name has metadata")),
        }
    }

    /// Accepts symbolic names and `wolfram:<code>` for codes with a
    /// registered tester.
    pub fn parse(s: &str) -> Result<TestTarget, RuleError> {
        let rule = crate::parse_rule(s)?;
        let name = RuleName::from_rule(rule).ok_or_else(|| RuleError::NoMetadata(s.to_string()))?;
        Ok(TestTarget::from_name(name))
    }

    pub fn rule(&self) -> Rule {
        match self {
            TestTarget::Meta(m) => m.rule(),
            TestTarget::Trivial(t) => t.rule(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestTarget::Meta(m) => m.name().to_string(),
            TestTarget::Trivial(t) => t.name().to_string(),
        }
    }
}

/// Periodic words (period 1 or 2) whose every window is non-final, so that
/// long stretches of them stay non-final for a long time.
pub fn non_final_tilings(meta: &RuleMeta) -> Vec<Vec<bool>> {
    let w = meta.width();
    let mut out = Vec::new();
    for period in 1..=2usize {
        for word in 0..1u32 << period {
            let cell = |j: usize| word >> (j % period) & 1 == 1;
            let all_non_final = (0..period).all(|phase| {
                let bits = (0..w).fold(0, |acc, j| acc << 1 | cell(phase + j) as u32);
                !meta.is_final(Pattern::new(bits, w))
            });
            let primitive = period == 1 || cell(0) != cell(1);
            if all_non_final && primitive {
                out.push((0..period).map(cell).collect());
            }
        }
    }
    out
}

/// A configuration alternating random stretches with non-final stretches,
/// with lengths on the order of `block`. Non-final stretches longer than
/// `2t` survive `t` steps, so evolutions keep both kinds of region.
pub fn structured_configuration<R: rand::Rng + ?Sized>(
    meta: &RuleMeta,
    n: usize,
    block: usize,
    rng: &mut R,
) -> Result<crate::Configuration, crate::CoreError> {
    let tilings = non_final_tilings(meta);
    let block = block.max(1);
    let mut bits = Vec::with_capacity(n + 4 * block);
    while bits.len() < n {
        let len = rng.gen_range(1..=2 * block);
        if rng.gen_bool(0.5) && !tilings.is_empty() {
            let tile = &tilings[rng.gen_range(0..tilings.len())];
            let phase = rng.gen_range(0..tile.len());
            bits.extend((0..len).map(|j| tile[(phase + j) % tile.len()]));
        } else {
            bits.extend((0..len).map(|_| rng.gen_bool(0.5)));
        }
    }
    bits.truncate(n);
    crate::Configuration::from_bits(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Configuration;

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn final_sets() {
        let maj = builtin_meta(RuleName::Maj).unwrap();
        assert_eq!(maj.classify(p("101")).unwrap(), Finality::NonFinal);
        assert_eq!(maj.classify(p("110")).unwrap(), Finality::Final);
        assert!(maj.classify(p("1")).is_err());
        let or = builtin_meta(RuleName::Or).unwrap();
        assert_eq!(or.k(), 0);
        assert_eq!(or.classify(p("1")).unwrap(), Finality::Final);
        let fih = builtin_meta(RuleName::Fih).unwrap();
        assert_eq!(fih.non_final_patterns(), vec![p("000"), p("111")]);
        let and = builtin_meta(RuleName::And).unwrap();
        assert_eq!(and.final_patterns(), vec![p("0")]);
        assert_eq!(and.rule(), Rule::AND);
    }

    #[test]
    fn tilings() {
        let tile = |name| non_final_tilings(&builtin_meta(name).unwrap());
        assert_eq!(tile(RuleName::Or), vec![vec![false]]);
        assert_eq!(tile(RuleName::Maj), vec![vec![true, false], vec![false, true]]);
        assert_eq!(tile(RuleName::Fih), vec![vec![false], vec![true]]);
    }

    #[test]
    fn predictors() {
        let maj = builtin_meta(RuleName::Maj).unwrap();
        let min = builtin_meta(RuleName::Min).unwrap();
        let fuh = builtin_meta(RuleName::Fuh).unwrap();
        for b in [false, true] {
            for dt in [Parity::EVEN, Parity::ODD] {
                for dd in [Parity::EVEN, Parity::ODD] {
                    assert_eq!(maj.f_fwd(b, dt, dd), b);
                    assert_eq!(min.f_fwd(b, dt, dd), b ^ dt.bit());
                    assert_eq!(fuh.f_fwd(b, dt, dd), b ^ dt.bit() ^ dd.bit());
                }
            }
        }
    }

    #[test]
    fn transports() {
        let maj = builtin_meta(RuleName::Maj).unwrap();
        assert_eq!(maj.h_fwd(p("010"), Parity::ODD, 1).unwrap(), p("010"));
        assert_eq!(maj.h_fwd(p("010"), Parity::ODD, 2).unwrap(), p("101"));
        assert_eq!(maj.h_bwd(p("101"), Parity::ODD, 0).unwrap(), p("010"));
        assert!(maj.h_fwd(p("110"), Parity::ODD, 0).is_err());
        let fih = builtin_meta(RuleName::Fih).unwrap();
        assert_eq!(fih.h_fwd(p("000"), Parity::EVEN, 5).unwrap(), p("000"));
        assert_eq!(fih.h_fwd(p("000"), Parity::ODD, 5).unwrap(), p("111"));
        let fuh = builtin_meta(RuleName::Fuh).unwrap();
        assert_eq!(fuh.h_bwd(p("111"), Parity::ODD, 3).unwrap(), p("111"));
    }

    #[test]
    fn builder_rejects_distance_dependence() {
        let bad = MetaBuilder::new("bad", Rule::MAJ, 1)
            .final_strs(&THRESHOLD_FINAL)
            .transport(|tau, _, dd| flip_if(tau, dd == 3))
            .build();
        assert!(matches!(bad, Err(RuleError::InvalidMeta(_))));
        let not_bijective = MetaBuilder::new("bad", Rule::MAJ, 1)
            .final_strs(&THRESHOLD_FINAL)
            .transport(|_, _, _| p("010"))
            .build();
        assert!(not_bijective.is_err());
    }

    #[test]
    fn constructors_examples() {
        let or = builtin_meta(RuleName::Or).unwrap();
        let sigma: Configuration = "1000100101".parse().unwrap();
        let out = or.finalize_interval(&sigma, 0, 4).unwrap();
        assert_eq!(out.to_string(), "1111100101");
        let req = PlantRequest {
            z: 1,
            nu: true,
            gamma: Parity::EVEN,
            gamma_prime: Parity::EVEN,
            side: Side::Right,
        };
        let (out, z) = or.plant_final(&sigma, &req).unwrap();
        assert_eq!(z, 2);
        assert!(out.get(2));

        let maj = builtin_meta(RuleName::Maj).unwrap();
        let sigma: Configuration = "1010000000".parse().unwrap();
        let req = PlantRequest { z: 1, ..req };
        let (out, z) = maj.plant_final(&sigma, &req).unwrap();
        assert_eq!(z, 2);
        assert_eq!(out.window(2, 1), p("011"));

        let min = builtin_meta(RuleName::Min).unwrap();
        let req = PlantRequest {
            nu: false,
            gamma: Parity::ODD,
            ..req
        };
        let (out, z) = min.plant_final(&sigma, &req).unwrap();
        assert_eq!(z, 2);
        assert_eq!(out.window(2, 1), p("011"));
    }

    #[test]
    fn trivial_names() {
        assert_eq!(trivial_rule(RuleName::Nor).unwrap().rule(), Rule::NOR);
        assert!(trivial_rule(RuleName::Maj).is_err());
        assert!(builtin_meta(RuleName::Nor).is_err());
        assert!(matches!(TestTarget::parse("wolfram:232").unwrap(), TestTarget::Meta(_)));
        assert!(TestTarget::parse("wolfram:110").is_err());
    }
}
