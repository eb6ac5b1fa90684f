use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Linear-model trust region over a simplex of `d + 1` points.
    #[default]
    CobylaLike,
    NelderMead,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Objective evaluations per run.
    pub max_iterations: usize,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Stop once the simplex values spread by at most this much; 0 disables.
    pub tolerance: f64,
    /// Warm-started reruns after the first run.
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { method: Method::CobylaLike, max_iterations: 500, rho_begin: 0.5, rho_end: 1e-4, tolerance: 0.0, restarts: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.rho_end > 0.0 && self.rho_begin >= self.rho_end && self.rho_begin.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "trust radii need 0 < rho_end ≤ rho_begin, got {} and {}",
                self.rho_begin, self.rho_end
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance {} must be non-negative", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Radius,
    Budget,
    Tolerance,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Best-so-far value after each evaluation.
    pub history: Vec<f64>,
    pub stop: StopReason,
}

/// Counts evaluations, rejects non-finite values and tracks the best point.
struct Tracked<F> {
    f: F,
    evals: usize,
    max: usize,
    best: Option<(Vec<f64>, f64)>,
    history: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Tracked<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let v = (self.f)(x)?;
        self.evals += 1;
        if !v.is_finite() {
            return Err(Error::NonFinite { value: v, evaluation: self.evals, theta: x.to_vec() });
        }
        if self.best.as_ref().is_none_or(|(_, b)| v < *b) {
            self.best = Some((x.to_vec(), v));
        }
        self.history.push(self.best.as_ref().map_or(v, |b| b.1));
        Ok(v)
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.max
    }

    fn finish(self, stop: StopReason) -> Minimum {
        let (x, value) = self.best.expect("at least one evaluation");
        Minimum { x, value, evaluations: self.evals, history: self.history, stop }
    }
}

/// Minimizes `f` from `x0` with the configured method. The objective is
/// evaluated at most `max_iterations` times.
pub fn minimize<F>(f: F, cfg: &OptimizerConfig, x0: &[f64]) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let mut t = Tracked { f, evals: 0, max: cfg.max_iterations, best: None, history: Vec::new() };
    if x0.is_empty() {
        t.eval(x0)?;
        return Ok(t.finish(StopReason::Radius));
    }
    let stop = match cfg.method {
        Method::CobylaLike => trust_region(&mut t, cfg, x0)?,
        Method::NelderMead => nelder_mead(&mut t, cfg, x0)?,
    };
    Ok(t.finish(stop))
}

type Vertex = (Vec<f64>, f64);

fn axis_simplex<F: FnMut(&[f64]) -> Result<f64>>(t: &mut Tracked<F>, center: Vertex, rho: f64) -> Result<Option<Vec<Vertex>>> {
    let d = center.0.len();
    let mut sim = vec![center];
    for i in 0..d {
        if t.exhausted() {
            return Ok(None);
        }
        let mut x = sim[0].0.clone();
        x[i] += rho;
        let v = t.eval(&x)?;
        sim.push((x, v));
    }
    Ok(Some(sim))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn argmin(sim: &[Vertex]) -> usize {
    (0..sim.len()).min_by(|&a, &b| sim[a].1.total_cmp(&sim[b].1)).expect("nonempty simplex")
}

fn spread(sim: &[Vertex]) -> f64 {
    let (lo, hi) = sim.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.1), hi.max(v.1)));
    hi - lo
}

/// Gradient of the linear interpolant through the simplex, or `None` when
/// the simplex is degenerate.
fn model_gradient(sim: &[Vertex], b: usize) -> Option<Vec<f64>> {
    let d = sim[0].0.len();
    let mut a = Vec::with_capacity(d * d);
    let mut rhs = Vec::with_capacity(d);
    let mut scale: f64 = 0.0;
    for (i, (x, v)) in sim.iter().enumerate() {
        if i == b {
            continue;
        }
        for j in 0..d {
            let dx = x[j] - sim[b].0[j];
            scale = scale.max(dx.abs());
            a.push(dx);
        }
        rhs.push(v - sim[b].1);
    }
    solve(&mut a, &mut rhs, d, scale * 1e-10)
}

/// Gaussian elimination with partial pivoting on a row-major `d × d` system.
fn solve(a: &mut [f64], b: &mut [f64], d: usize, tiny: f64) -> Option<Vec<f64>> {
    for col in 0..d {
        let p = (col..d).max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))?;
        if a[p * d + col].abs() <= tiny {
            return None;
        }
        if p != col {
            for j in 0..d {
                a.swap(p * d + j, col * d + j);
            }
            b.swap(p, col);
        }
        for r in col + 1..d {
            let m = a[r * d + col] / a[col * d + col];
            if m != 0.0 {
                for j in col..d {
                    a[r * d + j] -= m * a[col * d + j];
                }
                b[r] -= m * b[col];
            }
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let s: f64 = (r + 1..d).map(|j| a[r * d + j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r * d + r];
    }
    Some(x)
}

fn trust_region<F: FnMut(&[f64]) -> Result<f64>>(t: &mut Tracked<F>, cfg: &OptimizerConfig, x0: &[f64]) -> Result<StopReason> {
    let mut rho = cfg.rho_begin;
    let v0 = t.eval(x0)?;
    let Some(mut sim) = axis_simplex(t, (x0.to_vec(), v0), rho)? else {
        return Ok(StopReason::Budget);
    };
    loop {
        if t.exhausted() {
            return Ok(StopReason::Budget);
        }
        if cfg.tolerance > 0.0 && spread(&sim) <= cfg.tolerance {
            return Ok(StopReason::Tolerance);
        }
        let b = argmin(&sim);
        let g = model_gradient(&sim, b).filter(|g| g.iter().all(|x| x.is_finite()));
        let gnorm = g.as_ref().map_or(0.0, |g| g.iter().map(|x| x * x).sum::<f64>().sqrt());
        let flat = g.is_some();
        let Some(g) = g.filter(|_| gnorm > 0.0) else {
            // Degenerate or flat model: rebuild around the best point.
            if flat {
                if rho <= cfg.rho_end {
                    return Ok(StopReason::Radius);
                }
                rho = (rho / 2.0).max(cfg.rho_end);
            }
            match axis_simplex(t, sim[b].clone(), rho)? {
                Some(s) => sim = s,
                None => return Ok(StopReason::Budget),
            }
            continue;
        };
        let trial: Vec<f64> = sim[b].0.iter().zip(&g).map(|(x, gi)| x - rho * gi / gnorm).collect();
        let vt = t.eval(&trial)?;
        let worst = (0..sim.len()).filter(|&i| i != b).max_by(|&i, &j| sim[i].1.total_cmp(&sim[j].1)).expect("d ≥ 1");
        if vt < sim[b].1 {
            sim[worst] = (trial, vt);
            continue;
        }
        if vt < sim[worst].1 {
            sim[worst] = (trial, vt);
        }
        // Pull stragglers back into the trust region before shrinking.
        let b = argmin(&sim);
        let far = (0..sim.len()).filter(|&i| i != b).max_by(|&i, &j| dist(&sim[i].0, &sim[b].0).total_cmp(&dist(&sim[j].0, &sim[b].0)));
        if let Some(far) = far
            && dist(&sim[far].0, &sim[b].0) > 2.0 * rho
        {
            if t.exhausted() {
                return Ok(StopReason::Budget);
            }
            let r = dist(&sim[far].0, &sim[b].0);
            let x: Vec<f64> = sim[b].0.iter().zip(&sim[far].0).map(|(c, y)| c + rho * (y - c) / r).collect();
            let v = t.eval(&x)?;
            sim[far] = (x, v);
            continue;
        }
        if rho <= cfg.rho_end {
            return Ok(StopReason::Radius);
        }
        rho = (rho / 2.0).max(cfg.rho_end);
        match axis_simplex(t, sim[b].clone(), rho)? {
            Some(s) => sim = s,
            None => return Ok(StopReason::Budget),
        }
    }
}

fn nelder_mead<F: FnMut(&[f64]) -> Result<f64>>(t: &mut Tracked<F>, cfg: &OptimizerConfig, x0: &[f64]) -> Result<StopReason> {
    let d = x0.len();
    let v0 = t.eval(x0)?;
    let Some(mut sim) = axis_simplex(t, (x0.to_vec(), v0), cfg.rho_begin)? else {
        return Ok(StopReason::Budget);
    };
    let point = |c: &[f64], y: &[f64], s: f64| -> Vec<f64> { c.iter().zip(y).map(|(c, y)| c + s * (y - c)).collect() };
    loop {
        sim.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = sim[1..].iter().map(|v| dist(&v.0, &sim[0].0)).fold(0.0, f64::max);
        if size <= cfg.rho_end {
            return Ok(StopReason::Radius);
        }
        if cfg.tolerance > 0.0 && spread(&sim) <= cfg.tolerance {
            return Ok(StopReason::Tolerance);
        }
        if t.exhausted() {
            return Ok(StopReason::Budget);
        }
        let mut c = vec![0.0; d];
        for v in &sim[..d] {
            for (ci, xi) in c.iter_mut().zip(&v.0) {
                *ci += xi / d as f64;
            }
        }
        let worst = sim[d].clone();
        let xr = point(&c, &worst.0, -1.0);
        let vr = t.eval(&xr)?;
        if vr < sim[0].1 {
            if t.exhausted() {
                sim[d] = (xr, vr);
                continue;
            }
            let xe = point(&c, &worst.0, -2.0);
            let ve = t.eval(&xe)?;
            sim[d] = if ve < vr { (xe, ve) } else { (xr, vr) };
            continue;
        }
        if vr < sim[d - 1].1 {
            sim[d] = (xr, vr);
            continue;
        }
        if t.exhausted() {
            continue;
        }
        let (xc, vc) = if vr < worst.1 {
            let x = point(&c, &worst.0, -0.5);
            let v = t.eval(&x)?;
            (x, v)
        } else {
            let x = point(&c, &worst.0, 0.5);
            let v = t.eval(&x)?;
            (x, v)
        };
        if vc < worst.1.min(vr) {
            sim[d] = (xc, vc);
            continue;
        }
        for i in 1..=d {
            if t.exhausted() {
                break;
            }
            let x = point(&sim[0].0, &sim[i].0, 0.5);
            let v = t.eval(&x)?;
            sim[i] = (x, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 5.0];
        let x = solve(&mut a, &mut b, 2, 1e-14).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn singular_system_is_detected() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 2.0];
        assert!(solve(&mut a, &mut b, 2, 1e-12).is_none());
    }
}
