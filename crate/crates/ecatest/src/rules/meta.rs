use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Parity, Pattern};
use crate::{Configuration, Rule, RuleError};

/// Whether a window is in the final set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Finality {
    Final,
    NonFinal,
}

/// The final-value predictor: the predicted bit is the source bit XOR the
/// selected parity arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FinalPrediction {
    /// XOR in the parity of the time gap.
    pub dt: bool,
    /// XOR in the parity of the spatial distance.
    pub dd: bool,
}

impl FinalPrediction {
    pub const IDENTITY: FinalPrediction = FinalPrediction { dt: false, dd: false };

    pub fn apply(self, value: bool, dt: Parity, dd: Parity) -> bool {
        value ^ (self.dt && dt.bit()) ^ (self.dd && dd.bit())
    }
}

/// Shape of the set of configurations reachable after `t` steps, used by the
/// exact feasibility check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ImageModel {
    /// Every maximal run of `target` cells bounded by the other value has
    /// length at least `2t + 1`.
    Runs { target: bool },
    /// Edges between neighbors are markers or fillers; every nonempty gap of
    /// fillers between markers has length at least `1 + t` per adjacent
    /// empty gap. Markers are value changes when `marker_is_change`.
    Gaps { marker_is_change: bool },
    /// No characterization; only the brute-force check applies.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TesterKind {
    Meta,
    TrivialOneStepConverging,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Arguments of the planting constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PlantRequest {
    pub z: usize,
    pub nu: bool,
    pub gamma: Parity,
    pub gamma_prime: Parity,
    pub side: Side,
}

pub type FinalizeFn = Arc<dyn Fn(&RuleMeta, &Configuration, usize, usize) -> Configuration + Send + Sync>;
pub type PlantFn = Arc<dyn Fn(&RuleMeta, &Configuration, &PlantRequest) -> (Configuration, usize) + Send + Sync>;
pub type TransportFn = dyn Fn(Pattern, Parity, i64) -> Pattern;

/// Tester-facing metadata of a rule.
#[derive(Clone)]
pub struct RuleMeta {
    name: String,
    rule: Rule,
    k: usize,
    final_mask: u128,
    prediction: FinalPrediction,
    // Indexed by `pattern << 2 | dt << 1 | dd`.
    transport: Vec<u32>,
    transport_inv: Vec<u32>,
    finalize: FinalizeFn,
    plant: PlantFn,
    image: ImageModel,
}

impl fmt::Debug for RuleMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleMeta")
            .field("name", &self.name)
            .field("rule", &self.rule)
            .field("k", &self.k)
            .field("final", &self.final_patterns())
            .field("prediction", &self.prediction)
            .field("image", &self.image)
            .finish()
    }
}

impl RuleMeta {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Window width `2k + 1`.
    pub fn width(&self) -> usize {
        2 * self.k + 1
    }

    pub fn prediction(&self) -> FinalPrediction {
        self.prediction
    }

    pub fn image_model(&self) -> ImageModel {
        self.image
    }

    pub fn tester_kind(&self) -> TesterKind {
        TesterKind::Meta
    }

    #[inline]
    pub fn is_final(&self, p: Pattern) -> bool {
        debug_assert_eq!(p.len(), self.width());
        self.final_mask >> p.bits() & 1 == 1
    }

    pub fn classify(&self, p: Pattern) -> Result<Finality, RuleError> {
        let p = p.expect_len(self.width())?;
        Ok(if self.is_final(p) {
            Finality::Final
        } else {
            Finality::NonFinal
        })
    }

    pub fn final_patterns(&self) -> Vec<Pattern> {
        Pattern::all(self.width()).filter(|&p| self.is_final(p)).collect()
    }

    pub fn non_final_patterns(&self) -> Vec<Pattern> {
        Pattern::all(self.width()).filter(|&p| !self.is_final(p)).collect()
    }

    /// Center bits of final patterns: the legal planting targets.
    pub fn legal_centers(&self) -> Vec<bool> {
        let mut out: Vec<bool> = self.final_patterns().iter().map(|p| p.center()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn window_final(&self, c: &Configuration, i: usize) -> bool {
        self.is_final(c.window(i, self.k))
    }

    pub fn f_fwd(&self, value: bool, dt: Parity, dd: Parity) -> bool {
        self.prediction.apply(value, dt, dd)
    }

    fn transport_index(&self, p: Pattern, dt: Parity, dd: i64) -> Result<usize, RuleError> {
        let p = p.expect_len(self.width())?;
        if self.is_final(p) {
            return Err(RuleError::NotNonFinal(p.to_string()));
        }
        Ok((p.bits() as usize) << 2 | (dt.bit() as usize) << 1 | Parity::of_signed(dd).bit() as usize)
    }

    /// Transport of a non-final window across a time gap of parity `dt` and
    /// a displacement `dd`.
    pub fn h_fwd(&self, p: Pattern, dt: Parity, dd: i64) -> Result<Pattern, RuleError> {
        let idx = self.transport_index(p, dt, dd)?;
        Ok(Pattern::new(self.transport[idx], self.width()))
    }

    pub fn h_bwd(&self, p: Pattern, dt: Parity, dd: i64) -> Result<Pattern, RuleError> {
        let idx = self.transport_index(p, dt, dd)?;
        Ok(Pattern::new(self.transport_inv[idx], self.width()))
    }

    /// Rewrites the non-final locations of `[x, y]` so that every window in
    /// the interval becomes final. `x == y` selects the whole ring.
    pub fn finalize_interval(&self, sigma: &Configuration, x: usize, y: usize) -> Result<Configuration, RuleError> {
        let n = sigma.len();
        if x >= n || y >= n {
            return Err(RuleError::Precondition(format!("interval [{x}, {y}] outside ring of {n}")));
        }
        if !self.window_final(sigma, x) || !self.window_final(sigma, y) {
            return Err(RuleError::Precondition(format!("endpoints of [{x}, {y}] are not final")));
        }
        Ok((self.finalize)(self, sigma, x, y))
    }

    /// Plants a final window next to the non-final window at `req.z`.
    pub fn plant_final(&self, sigma: &Configuration, req: &PlantRequest) -> Result<(Configuration, usize), RuleError> {
        if req.z >= sigma.len() {
            return Err(RuleError::Precondition(format!("z = {} outside ring", req.z)));
        }
        if self.window_final(sigma, req.z) {
            return Err(RuleError::Precondition(format!("window at {} is final", req.z)));
        }
        if !self.legal_centers().contains(&req.nu) {
            return Err(RuleError::Precondition(format!("nu = {} is not a final center", req.nu as u8)));
        }
        Ok((self.plant)(self, sigma, req))
    }
}

/// Assembles and validates a `RuleMeta`.
pub struct MetaBuilder {
    name: String,
    rule: Rule,
    k: usize,
    final_mask: u128,
    prediction: FinalPrediction,
    transport: Option<Box<TransportFn>>,
    finalize: Option<FinalizeFn>,
    plant: Option<PlantFn>,
    image: ImageModel,
}

impl MetaBuilder {
    pub fn new(name: &str, rule: Rule, k: usize) -> MetaBuilder {
        MetaBuilder {
            name: name.to_string(),
            rule,
            k,
            final_mask: 0,
            prediction: FinalPrediction::IDENTITY,
            transport: None,
            finalize: None,
            plant: None,
            image: ImageModel::Unknown,
        }
    }

    pub fn final_patterns<I: IntoIterator<Item = Pattern>>(mut self, patterns: I) -> MetaBuilder {
        self.final_mask = patterns.into_iter().fold(0, |m, p| m | 1u128 << p.bits());
        self
    }

    /// Final set given as strings, e.g. `["111", "110"]`.
    pub fn final_strs(self, patterns: &[&str]) -> MetaBuilder {
        let ps: Vec<Pattern> = patterns.iter().map(|s| s.parse().expect("literal pattern")).collect();
        self.final_patterns(ps)
    }

    pub fn prediction(mut self, dt: bool, dd: bool) -> MetaBuilder {
        self.prediction = FinalPrediction { dt, dd };
        self
    }

    pub fn transport<F>(mut self, h: F) -> MetaBuilder
    where
        F: Fn(Pattern, Parity, i64) -> Pattern + 'static,
    {
        self.transport = Some(Box::new(h));
        self
    }

    pub fn finalize(mut self, f: FinalizeFn) -> MetaBuilder {
        self.finalize = Some(f);
        self
    }

    pub fn plant(mut self, f: PlantFn) -> MetaBuilder {
        self.plant = Some(f);
        self
    }

    pub fn image(mut self, model: ImageModel) -> MetaBuilder {
        self.image = model;
        self
    }

    /// Validates the partition, the transport table and its inverse.
    pub fn build(self) -> Result<RuleMeta, RuleError> {
        if self.k > 3 {
            return Err(RuleError::InvalidMeta(format!("radius {} unsupported", self.k)));
        }
        let width = 2 * self.k + 1;
        let h = self
            .transport
            .as_ref()
            .ok_or_else(|| RuleError::InvalidMeta("missing transport".into()))?;
        let non_final: Vec<Pattern> = Pattern::all(width)
            .filter(|p| self.final_mask >> p.bits() & 1 == 0)
            .collect();
        for &tau in &non_final {
            for dt in [Parity::EVEN, Parity::ODD] {
                let even = h(tau, dt, 0);
                let odd = h(tau, dt, 1);
                for l in 2..16i64 {
                    let expect = if l % 2 == 0 { even } else { odd };
                    if h(tau, dt, l) != expect || h(tau, dt, -l) != expect {
                        return Err(RuleError::InvalidMeta(format!(
                            "transport of {tau} depends on more than the parity of the distance"
                        )));
                    }
                }
            }
        }
        for dt in [Parity::EVEN, Parity::ODD] {
            for dd in 0..2 {
                let mut images: Vec<Pattern> = non_final.iter().map(|&tau| h(tau, dt, dd)).collect();
                if let Some(bad) = images.iter().find(|p| p.len() != width || self.final_mask >> p.bits() & 1 == 1) {
                    return Err(RuleError::InvalidMeta(format!("transport leaves the non-final set at {bad}")));
                }
                images.sort();
                images.dedup();
                if images.len() != non_final.len() {
                    return Err(RuleError::InvalidMeta("transport is not a bijection".into()));
                }
            }
        }
        Ok(self.build_unchecked())
    }

    /// Builds without validation; used to construct deliberately broken
    /// metadata for negative controls.
    pub fn build_unchecked(self) -> RuleMeta {
        let width = 2 * self.k + 1;
        let size = 1usize << width << 2;
        let mut transport = vec![0u32; size];
        let mut transport_inv = vec![0u32; size];
        if let Some(h) = &self.transport {
            for tau in Pattern::all(width) {
                if self.final_mask >> tau.bits() & 1 == 1 {
                    continue;
                }
                for dt in [Parity::EVEN, Parity::ODD] {
                    for dd in 0..2i64 {
                        let out = h(tau, dt, dd);
                        let key = (dt.bit() as usize) << 1 | dd as usize;
                        transport[(tau.bits() as usize) << 2 | key] = out.bits();
                        transport_inv[(out.bits() as usize) << 2 | key] = tau.bits();
                    }
                }
            }
        }
        let unsupported_finalize: FinalizeFn = Arc::new(|_, s, _, _| s.clone());
        let unsupported_plant: PlantFn = Arc::new(|_, s, r| (s.clone(), r.z));
        RuleMeta {
            name: self.name,
            rule: self.rule,
            k: self.k,
            final_mask: self.final_mask,
            prediction: self.prediction,
            transport,
            transport_inv,
            finalize: self.finalize.unwrap_or(unsupported_finalize),
            plant: self.plant.unwrap_or(unsupported_plant),
            image: self.image,
        }
    }
}

impl RuleMeta {
    /// Starts a builder pre-populated with this metadata, for deriving
    /// variants (mutations, renames).
    pub fn to_builder(&self) -> MetaBuilder {
        let table = self.transport.clone();
        let width = self.width();
        MetaBuilder {
            name: self.name.clone(),
            rule: self.rule,
            k: self.k,
            final_mask: self.final_mask,
            prediction: self.prediction,
            transport: Some(Box::new(move |tau: Pattern, dt: Parity, dd: i64| {
                let idx = (tau.bits() as usize) << 2 | (dt.bit() as usize) << 1 | Parity::of_signed(dd).bit() as usize;
                Pattern::new(table[idx], width)
            })),
            finalize: Some(self.finalize.clone()),
            plant: Some(self.plant.clone()),
            image: self.image,
        }
    }

    /// The metadata of the complementary rule, obtained by complementing
    /// patterns, the final set and every constructor's input and output.
    pub fn complement(&self, name: &str) -> RuleMeta {
        let width = self.width();
        let base = self.clone();
        let final_set: Vec<Pattern> = self.final_patterns().iter().map(|p| p.complement()).collect();
        let h_base = self.clone();
        let f_base = base.clone();
        let p_base = base.clone();
        let image = match self.image {
            ImageModel::Runs { target } => ImageModel::Runs { target: !target },
            other => other,
        };
        MetaBuilder::new(name, self.rule.complement(), self.k)
            .final_patterns(final_set)
            .prediction(self.prediction.dt, self.prediction.dd)
            .transport(move |tau, dt, dd| {
                h_base
                    .h_fwd(tau.complement(), dt, dd)
                    .map(Pattern::complement)
                    .unwrap_or(Pattern::new(0, width))
            })
            .finalize(Arc::new(move |_, sigma, x, y| {
                (f_base.finalize)(&f_base, &sigma.complement(), x, y).complement()
            }))
            .plant(Arc::new(move |_, sigma, req| {
                let flipped = PlantRequest { nu: !req.nu, ..*req };
                let (out, z) = (p_base.plant)(&p_base, &sigma.complement(), &flipped);
                (out.complement(), z)
            }))
            .image(image)
            .build_unchecked()
    }
}
