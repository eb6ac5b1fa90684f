use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::ansatz::{AnsatzSpec, SUPPORT_EPS, build, build_hardware_efficient, generic_theta};
use crate::bits;
use crate::error::{Error, Result};
use crate::hdc::{
    CacheKey, CachedResult, CutPlan, FragmentCache, PlanKind, SubcircuitPlan, combine_recorded, cut, default_cuts, mitigated_recombine,
    plan_with, recombine, stream_key,
};
use crate::portfolio::{EnergyForm, PortfolioProblem, cvar, cvar_dist};
use crate::sim::{Circuit, ProbDist, ReadoutNoiseModel, SampleSet, apply_readout_noise, rng, sample_dist, simulate};

/// Readout noise for sampled runs.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    /// The six measured fidelity pairs, cycled over the register.
    Device,
    Uniform {
        f00: f64,
        f11: f64,
    },
    PerQubit {
        f00: Vec<f64>,
        f11: Vec<f64>,
    },
}

impl NoiseConfig {
    pub fn model(&self, n: usize) -> Result<ReadoutNoiseModel> {
        match self {
            NoiseConfig::Device => Ok(ReadoutNoiseModel::device(n)),
            NoiseConfig::Uniform { f00, f11 } => ReadoutNoiseModel::uniform(n, *f00, *f11),
            NoiseConfig::PerQubit { f00, f11 } => {
                let m = ReadoutNoiseModel::new(f00.clone(), f11.clone())?;
                if m.width() != n {
                    return Err(Error::WidthMismatch { expected: n, got: m.width() });
                }
                Ok(m)
            }
        }
    }
}

/// How one objective evaluation is carried out.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Execution {
    /// Exact statevector probabilities of the whole circuit, or of each
    /// uncut subcircuit when a plan layout is chosen.
    #[default]
    Direct,
    /// Exact fragment distributions stitched through the reduced channel.
    HdcExact,
    /// Fragment shots combined sequentially; `⌈base_shots / α⌉` shots per
    /// subcircuit.
    HdcSampled {
        base_shots: u64,
        #[serde(default)]
        noise: Option<NoiseConfig>,
        #[serde(default)]
        mitigate: bool,
    },
}

impl Execution {
    pub fn is_hdc(&self) -> bool {
        !matches!(self, Execution::Direct)
    }

    /// Shots per subcircuit at confidence level `alpha`.
    pub fn shots(&self, alpha: f64) -> Option<u64> {
        match self {
            Execution::HdcSampled { base_shots, .. } => Some(((*base_shots as f64 / alpha) - 1e-9).ceil().max(1.0) as u64),
            _ => None,
        }
    }
}

/// The circuit family being optimized.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Ansatz {
    Dicke(AnsatzSpec),
    /// Ry layers and CNOT ladders; `layers = None` uses `⌈log2 n⌉`.
    HardwareEfficient {
        n: usize,
        layers: Option<usize>,
    },
}

impl Ansatz {
    pub fn n(&self) -> usize {
        match self {
            Ansatz::Dicke(s) => s.n,
            Ansatz::HardwareEfficient { n, .. } => *n,
        }
    }
}

/// Result of one evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Dist(ProbDist<f64>),
    Samples(SampleSet),
}

impl Outcome {
    pub fn cvar(&self, problem: &PortfolioProblem<f64>, alpha: f64, form: EnergyForm) -> Result<f64> {
        match self {
            Outcome::Dist(d) => cvar_dist(d, problem, alpha, form),
            Outcome::Samples(s) => cvar(s, problem, alpha, form),
        }
    }

    /// Normalized distribution; samples become their empirical frequencies.
    pub fn dist(&self) -> ProbDist<f64> {
        match self {
            Outcome::Dist(d) => d.normalized().unwrap_or_else(|_| d.clone()),
            Outcome::Samples(s) => s.to_dist(),
        }
    }
}

enum Body {
    Full(Circuit),
    Split { plan: SubcircuitPlan, cuts: Vec<Option<CutPlan>>, offsets: Vec<usize> },
}

/// Turns angle vectors into output distributions or samples for one ansatz,
/// layout and execution mode. Fragment results are cached by θ-slice.
pub struct Executor {
    n: usize,
    body: Body,
    execution: Execution,
    noise: Option<ReadoutNoiseModel>,
    cache: FragmentCache,
    seed: u64,
}

/// Layout options for [`Executor::new`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayoutOptions {
    /// Subcircuit plan; `None` runs the whole ansatz unless the execution
    /// mode needs a plan, in which case the default plan is used.
    pub plan: Option<PlanKind>,
    pub fragment_width: usize,
    pub reversal: bool,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions { plan: None, fragment_width: crate::hdc::DEFAULT_FRAGMENT_WIDTH, reversal: false }
    }
}

impl Executor {
    pub fn new(ansatz: &Ansatz, layout: LayoutOptions, execution: Execution, seed: u64) -> Result<Self> {
        let n = ansatz.n();
        let noise = match &execution {
            Execution::HdcSampled { noise: Some(cfg), .. } => Some(cfg.model(n)?),
            Execution::HdcSampled { base_shots: 0, .. } => return Err(Error::InvalidConfig("base_shots must be positive".into())),
            _ => None,
        };
        let body = match ansatz {
            Ansatz::HardwareEfficient { n, layers } => {
                if execution.is_hdc() || layout.plan.is_some() {
                    return Err(Error::UnsupportedPlan("the hardware-efficient baseline runs undivided".into()));
                }
                let layers = layers.unwrap_or_else(|| crate::ansatz::hardware_efficient_layers(*n));
                Body::Full(build_hardware_efficient(*n, layers)?)
            }
            Ansatz::Dicke(spec) => {
                let kind = match layout.plan {
                    Some(k) => Some(k),
                    None if execution.is_hdc() => Some(PlanKind::default_for(spec)?),
                    None => None,
                };
                match kind {
                    None => Body::Full(build(spec)?),
                    Some(kind) => Self::split(spec, kind, &layout, execution.is_hdc())?,
                }
            }
        };
        let exec = Executor { n, body, execution, noise, cache: FragmentCache::new(), seed };
        if let Body::Split { cuts, .. } = &exec.body {
            for c in cuts.iter().flatten() {
                exec.cache.register(c);
            }
        }
        Ok(exec)
    }

    fn split(spec: &AnsatzSpec, kind: PlanKind, layout: &LayoutOptions, hdc: bool) -> Result<Body> {
        let mut plan = plan_with(spec, kind)?;
        if layout.reversal {
            plan = plan.with_reversal()?;
        }
        let cuts = plan
            .subcircuits
            .iter()
            .map(|s| {
                if !hdc || s.mirror_of.is_some() {
                    return Ok(None);
                }
                Ok(Some(cut(s, &default_cuts(s, layout.fragment_width)?)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let offsets = plan.param_offsets();
        Ok(Body::Split { plan, cuts, offsets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn param_count(&self) -> usize {
        match &self.body {
            Body::Full(c) => c.param_count(),
            Body::Split { plan, .. } => plan.param_count(),
        }
    }

    pub fn execution(&self) -> &Execution {
        &self.execution
    }

    pub fn subcircuit_plan(&self) -> Option<&SubcircuitPlan> {
        match &self.body {
            Body::Split { plan, .. } => Some(plan),
            Body::Full(_) => None,
        }
    }

    pub fn cut_plans(&self) -> Vec<&CutPlan> {
        match &self.body {
            Body::Split { cuts, .. } => cuts.iter().flatten().collect(),
            Body::Full(_) => Vec::new(),
        }
    }

    pub fn cache(&self) -> &FragmentCache {
        &self.cache
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count() {
            return Err(Error::ParamLength { expected: self.param_count(), got: theta.len() });
        }
        Ok(())
    }

    /// Exact pooled distribution, ignoring the execution mode.
    pub fn exact(&self, theta: &[f64]) -> Result<ProbDist<f64>> {
        self.check(theta)?;
        match &self.body {
            Body::Full(c) => Ok(ProbDist::from_state(&simulate::<f64>(c, theta)?)),
            Body::Split { plan, offsets, .. } => {
                let parts = (0..plan.len())
                    .into_par_iter()
                    .map(|s| {
                        let sub = &plan.subcircuits[s];
                        if sub.mirror_of.is_some() {
                            return Ok(None);
                        }
                        let slice = &theta[offsets[s]..offsets[s] + sub.param_count()];
                        Ok(Some(widen(&ProbDist::from_state(&simulate::<f64>(&sub.circuit, slice)?), self.n)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(mix(&resolve_mirrors(plan, parts, self.n), self.n))
            }
        }
    }

    /// Support of the pooled distribution at generic angles.
    pub fn structural_support(&self) -> Result<Vec<u64>> {
        Ok(self.exact(&generic_theta(self.param_count()))?.support(SUPPORT_EPS))
    }

    /// One evaluation at confidence level `alpha`; `index` keys the shot streams.
    pub fn evaluate(&self, theta: &[f64], alpha: f64, index: u64) -> Result<Outcome> {
        self.check(theta)?;
        let (plan, cuts, offsets) = match (&self.body, &self.execution) {
            (Body::Full(_), _) | (Body::Split { .. }, Execution::Direct) => return Ok(Outcome::Dist(self.exact(theta)?)),
            (Body::Split { plan, cuts, offsets }, _) => (plan, cuts, offsets),
        };
        let seed = rng::derive_seed(self.seed, index);
        let shots = self.execution.shots(alpha);
        let parts = (0..plan.len())
            .into_par_iter()
            .map(|s| {
                let Some(cp) = &cuts[s] else { return Ok(None) };
                let sub = &plan.subcircuits[s];
                let slice = &theta[offsets[s]..offsets[s] + sub.param_count()];
                let sub_seed = rng::derive_seed(seed, s as u64);
                let part = match shots {
                    None => Part::Dist(widen(&self.exact_cut(cp, s, slice)?, self.n)),
                    Some(shots) => self.sampled_cut(cp, s, slice, shots, sub_seed)?,
                };
                Ok(Some(part))
            })
            .collect::<Result<Vec<_>>>()?;
        let parts = resolve_mirrors(plan, parts, self.n);
        if parts.iter().all(|p| matches!(p, Part::Dist(_))) {
            return Ok(Outcome::Dist(mix(&parts, self.n)));
        }
        let mut draws = Vec::new();
        for p in parts {
            match p {
                Part::Samples(s) => draws.extend_from_slice(s.draws()),
                Part::Dist(_) => unreachable!("one execution mode per evaluation"),
            }
        }
        Ok(Outcome::Samples(SampleSet::from_draws(self.n, draws)))
    }

    fn cache_key(&self, cp: &CutPlan, s: usize, fragment: usize, input: u8, shots: u64) -> CacheKey {
        CacheKey { plan: cp.id(), subcircuit: s, fragment, input, shots, noisy: self.noise.is_some() }
    }

    fn exact_cut(&self, cp: &CutPlan, s: usize, slice: &[f64]) -> Result<ProbDist<f64>> {
        let mut dists = Vec::with_capacity(cp.fragments.len());
        for frag in &cp.fragments {
            let mut pair = [None, None];
            for &input in frag.inputs() {
                let key = self.cache_key(cp, s, frag.id, input, 0);
                let hit = self.cache.get_or_compute(key, frag.fingerprint(slice), || Ok(CachedResult::Exact(frag.dist(slice, input)?)))?;
                pair[input as usize] = hit.as_exact().cloned();
            }
            dists.push(pair);
        }
        recombine(cp, &dists, slice, true)
    }

    fn sampled_cut(&self, cp: &CutPlan, s: usize, slice: &[f64], shots: u64, seed: u64) -> Result<Part> {
        let mut streams = Vec::with_capacity(cp.fragments.len());
        for frag in &cp.fragments {
            let mut pair = [Vec::new(), Vec::new()];
            for &input in frag.inputs() {
                let key = self.cache_key(cp, s, frag.id, input, shots);
                let hit = self.cache.get_or_compute(key, frag.fingerprint(slice), || {
                    let dist = frag.dist(slice, input)?;
                    let mut r = rng::stream(seed, stream_key(frag.id, input));
                    let mut set = sample_dist(&dist, shots as usize, &mut r)?;
                    if let Some(noise) = &self.noise {
                        let local = noise.slice(self.n - cp.width + frag.lo, frag.width())?;
                        set = apply_readout_noise(&set, &local, rng::derive_seed(seed, (1 << 32) | stream_key(frag.id, input)))?;
                    }
                    Ok(CachedResult::Samples(set.draws().to_vec()))
                })?;
                pair[input as usize] = hit.as_samples().expect("sampled entries hold draws").to_vec();
            }
            streams.push(pair);
        }
        let mitigate = matches!(self.execution, Execution::HdcSampled { mitigate: true, .. });
        match (&self.noise, mitigate) {
            (Some(noise), true) => {
                let local = noise.slice(self.n - cp.width, cp.width)?;
                Ok(Part::Dist(widen(&mitigated_recombine(cp, &streams, &local, slice)?, self.n)))
            }
            _ => {
                let set = combine_recorded(cp, &streams, slice, seed)?;
                Ok(Part::Samples(SampleSet::from_draws(self.n, set.draws().to_vec())))
            }
        }
    }
}

enum Part {
    Dist(ProbDist<f64>),
    Samples(SampleSet),
}

/// Re-labels a subcircuit distribution over the full register; idle top
/// wires are `|0⟩`, so the integer values are unchanged.
fn widen(d: &ProbDist<f64>, n: usize) -> ProbDist<f64> {
    ProbDist::from_map(n, d.iter().collect())
}

fn resolve_mirrors<P: MirrorPart>(plan: &SubcircuitPlan, mut parts: Vec<Option<P>>, n: usize) -> Vec<P> {
    for (i, s) in plan.subcircuits.iter().enumerate() {
        if let Some(host) = s.mirror_of {
            let mirrored = parts[host].as_ref().expect("hosts are never mirrors").reversed(n);
            parts[i] = Some(mirrored);
        }
    }
    parts.into_iter().map(|p| p.expect("every subcircuit evaluated")).collect()
}

trait MirrorPart {
    fn reversed(&self, n: usize) -> Self;
}

impl MirrorPart for ProbDist<f64> {
    fn reversed(&self, n: usize) -> Self {
        ProbDist::from_map(n, self.iter().map(|(x, p)| (bits::reverse(x, n), p)).collect())
    }
}

impl MirrorPart for Part {
    fn reversed(&self, n: usize) -> Self {
        match self {
            Part::Dist(d) => Part::Dist(d.reversed(n)),
            Part::Samples(s) => Part::Samples(SampleSet::from_draws(n, s.draws().iter().map(|x| bits::reverse(*x, n)).collect())),
        }
    }
}

trait AsDist {
    fn as_dist(&self) -> &ProbDist<f64>;
}

impl AsDist for ProbDist<f64> {
    fn as_dist(&self) -> &ProbDist<f64> {
        self
    }
}

impl AsDist for Part {
    fn as_dist(&self) -> &ProbDist<f64> {
        match self {
            Part::Dist(d) => d,
            Part::Samples(_) => unreachable!("mixing applies to distributions"),
        }
    }
}

/// Equal-weight mixture of the subcircuit distributions.
fn mix<P: AsDist>(parts: &[P], n: usize) -> ProbDist<f64> {
    let w = 1.0 / parts.len() as f64;
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for p in parts {
        for (x, q) in p.as_dist().iter() {
            *acc.entry(x).or_insert(0.0) += w * q;
        }
    }
    ProbDist::from_map(n, acc)
}
