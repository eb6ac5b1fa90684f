use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::cut::{CutPlan, Fragment, check_forwarded_wire};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::{ProbDist, Simulator, StateVector};

/// Per-fragment output distributions indexed by input value; fragments
/// without an input port only fill slot 0.
pub type FragmentDists<T> = Vec<[Option<ProbDist<T>>; 2]>;

/// Exact distribution of a cut subcircuit through the reduced channel: only
/// `|0⟩⟨0|` and `|1⟩⟨1|` are forwarded across each cut.
pub fn reconstruct_exact<T: Real>(plan: &CutPlan, sub_theta: &[T]) -> Result<ProbDist<T>> {
    check_len(plan, sub_theta.len())?;
    let dists = exact_fragment_dists(plan, sub_theta)?;
    recombine(plan, &dists, sub_theta, true)
}

pub fn exact_fragment_dists<T: Real>(plan: &CutPlan, sub_theta: &[T]) -> Result<FragmentDists<T>> {
    plan.fragments
        .iter()
        .map(|f| {
            let mut pair = [None, None];
            for &input in f.inputs() {
                pair[input as usize] = Some(f.dist(sub_theta, input)?);
            }
            Ok(pair)
        })
        .collect()
}

fn check_len(plan: &CutPlan, got: usize) -> Result<()> {
    if got != plan.param_count {
        return Err(Error::ParamLength { expected: plan.param_count, got });
    }
    Ok(())
}

/// Stitches per-fragment distributions into the subcircuit distribution.
/// With `check`, fragments whose measured bits fail to determine the
/// forwarded bit are rejected.
pub fn recombine<T: Real>(plan: &CutPlan, dists: &FragmentDists<T>, sub_theta: &[T], check: bool) -> Result<ProbDist<T>> {
    if dists.len() != plan.fragments.len() {
        return Err(Error::InvalidCut(format!("{} fragment distributions for {} fragments", dists.len(), plan.fragments.len())));
    }
    let get = |f: usize, input: u8| {
        dists[f][input as usize].as_ref().ok_or_else(|| Error::InvalidCut(format!("missing distribution for fragment {f}, input {input}")))
    };
    if let Some(bridge) = &plan.bridge {
        let t = bridge.transfer(sub_theta)?;
        let upper = get(0, 0)?;
        let lower = get(1, 0)?;
        let shift = plan.fragments[1].width();
        let mut product = ProbDist::new(plan.width);
        for (a, p) in upper.iter() {
            for (b, q) in lower.iter() {
                product.add((a << shift) | b, p * q);
            }
        }
        return apply_bridge(&product, &t, bridge.upper, plan.width);
    }
    let eps = T::epsilon() * T::epsilon();
    // (measured prefix, forwarded bit) -> probability
    let mut acc: BTreeMap<(u64, u8), T> = BTreeMap::new();
    for (f, frag) in plan.fragments.iter().enumerate() {
        let mut next = BTreeMap::new();
        let step = |next: &mut BTreeMap<(u64, u8), T>, prefix: u64, p: T, dist: &ProbDist<T>| {
            for (y, q) in dist.iter() {
                let (measured, bit) = split(frag, y);
                let e = next.entry(((prefix << frag.measured_bits()) | measured, bit)).or_insert_with(T::zero);
                *e = *e + p * q;
            }
        };
        if f == 0 {
            let d = get(0, 0)?;
            if check && frag.output {
                check_forwarded_wire(d, f, 0, eps)?;
            }
            step(&mut next, 0, T::one(), d);
        } else {
            for &input in frag.inputs() {
                if check && frag.output {
                    check_forwarded_wire(get(f, input)?, f, input, eps)?;
                }
            }
            for (&(prefix, bit), &p) in &acc {
                step(&mut next, prefix, p, get(f, bit)?);
            }
        }
        acc = next;
    }
    let mut out = ProbDist::new(plan.width);
    for ((x, _), p) in acc {
        out.add(x, p);
    }
    Ok(out)
}

fn split(frag: &Fragment, y: u64) -> (u64, u8) {
    if frag.output { (y >> 1, (y & 1) as u8) } else { (y, 0) }
}

/// Applies the bridge block to a product distribution. Valid only when no
/// two input strings feed the same output string, since the block would
/// otherwise interfere them.
pub(crate) fn apply_bridge<T: Real>(product: &ProbDist<T>, t: &[[T; 4]; 4], upper: usize, width: usize) -> Result<ProbDist<T>> {
    let shift = width - 2 - upper;
    let mask = 0b11u64 << shift;
    let mut source: HashMap<u64, u64> = HashMap::new();
    let mut out = ProbDist::new(width);
    for (x, p) in product.iter() {
        let a = ((x & mask) >> shift) as usize;
        for (b, &tab) in t[a].iter().enumerate() {
            if tab <= T::epsilon() * T::epsilon() {
                continue;
            }
            let y = (x & !mask) | ((b as u64) << shift);
            if let Some(&prev) = source.get(&y)
                && prev != x
            {
                return Err(Error::ChannelViolation(format!("bridge maps both {prev:b} and {x:b} onto {y:b}")));
            }
            source.insert(y, x);
            out.add(y, p * tab);
        }
    }
    Ok(out)
}

/// Reference reconstruction through the full identity channel
/// `ρ = ½ Σ_O Tr(Oρ) O` over `O ∈ {I, X, Y, Z}`, each observable split into
/// its eigenprojectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliReference {
    /// All four observables.
    pub full: ProbDist<f64>,
    /// `I` and `Z` only; equals the reduced `|0⟩⟨0|`, `|1⟩⟨1|` channel.
    pub iz_only: ProbDist<f64>,
    /// Largest `|Tr(Xρ)|` or `|Tr(Yρ)|` over every cut and measured prefix.
    pub xy_max: f64,
}

/// Runs the four-observable decomposition. The forwarded wire of each
/// measured prefix is carried as an unnormalized 2×2 density matrix, so the
/// cost grows with the output support rather than with `4^p`.
pub fn pauli_reference(plan: &CutPlan, sub_theta: &[f64]) -> Result<PauliReference> {
    check_len(plan, sub_theta.len())?;
    if plan.bridge.is_some() {
        return Err(Error::UnsupportedPlan("the Pauli reference covers wire cuts only".into()));
    }
    let (full, xy_max) = pauli_path(plan, sub_theta, true)?;
    let (iz_only, _) = pauli_path(plan, sub_theta, false)?;
    Ok(PauliReference { full, iz_only, xy_max })
}

type Rho = [[Complex64; 2]; 2];

fn pauli_path(plan: &CutPlan, theta: &[f64], with_xy: bool) -> Result<(ProbDist<f64>, f64)> {
    let sim = Simulator::default();
    let zero = Complex64::new(0.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩
    let eigen: [[Complex64; 2]; 6] = [
        [Complex64::new(1.0, 0.0), zero],
        [zero, Complex64::new(1.0, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
    ];
    let mut xy_max: f64 = 0.0;
    let mut acc: BTreeMap<u64, Rho> = BTreeMap::new();
    let mut finals: BTreeMap<u64, f64> = BTreeMap::new();
    for (f, frag) in plan.fragments.iter().enumerate() {
        let w = frag.width();
        let local = frag.theta_slice(theta);
        let run = |e: &[Complex64; 2]| -> Result<Vec<Complex64>> {
            let mut amps = vec![zero; 1 << w];
            amps[0] = e[0];
            amps[1 << (w - 1)] = e[1];
            let init = StateVector::from_amplitudes(w, amps)?;
            Ok(sim.run_from(&frag.circuit, &local, init)?.amplitudes().to_vec())
        };
        // Weighted inputs for this fragment: one per incoming prefix.
        let inputs: Vec<(u64, Vec<(f64, usize)>)> = if f == 0 {
            vec![(0, vec![(1.0, 0)])]
        } else {
            acc.iter()
                .map(|(&prefix, rho)| {
                    let t_i = (rho[0][0] + rho[1][1]).re;
                    let t_z = (rho[0][0] - rho[1][1]).re;
                    let t_x = 2.0 * rho[0][1].re;
                    let t_y = -2.0 * rho[0][1].im;
                    xy_max = xy_max.max(t_x.abs()).max(t_y.abs());
                    let mut terms = vec![(0.5 * (t_i + t_z), 0), (0.5 * (t_i - t_z), 1)];
                    if with_xy {
                        terms.extend([(0.5 * t_x, 2), (-0.5 * t_x, 3), (0.5 * t_y, 4), (-0.5 * t_y, 5)]);
                    }
                    (prefix, terms)
                })
                .collect()
        };
        let mut outputs: Vec<Option<Vec<Complex64>>> = vec![None; 6];
        let mut next: BTreeMap<u64, Rho> = BTreeMap::new();
        for (prefix, terms) in inputs {
            for (c, e) in terms {
                if c == 0.0 {
                    continue;
                }
                if outputs[e].is_none() {
                    outputs[e] = Some(run(&eigen[e])?);
                }
                let amps = outputs[e].as_ref().expect("filled above");
                let mb = frag.measured_bits();
                if frag.output {
                    for s in 0..1u64 << mb {
                        let a = [amps[(s << 1) as usize], amps[((s << 1) | 1) as usize]];
                        if a[0].norm_sqr() + a[1].norm_sqr() == 0.0 {
                            continue;
                        }
                        let rho = next.entry((prefix << mb) | s).or_insert([[zero; 2]; 2]);
                        for i in 0..2 {
                            for j in 0..2 {
                                rho[i][j] += a[i] * a[j].conj() * c;
                            }
                        }
                    }
                } else {
                    for (s, a) in amps.iter().enumerate() {
                        let p = a.norm_sqr();
                        if p != 0.0 {
                            *finals.entry((prefix << mb) | s as u64).or_insert(0.0) += c * p;
                        }
                    }
                }
            }
        }
        acc = next;
    }
    let floor = f64::EPSILON * f64::EPSILON;
    let probs = finals.into_iter().filter(|(_, p)| p.abs() > floor).collect();
    Ok((ProbDist::from_map(plan.width, probs), xy_max))
}
