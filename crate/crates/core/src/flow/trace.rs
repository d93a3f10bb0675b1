use super::ode::{DenseStep, Dopri5};
use crate::error::{Error, Result};
use crate::geometry::{ContactForm, Point, Vector};
use crate::scene::ContactScene;
use serde::Serialize;

/// Gauss–Legendre nodes and weights on [0, 1], 5 points.
const GL5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_45),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// A solution of ẋ = direction·v_β(x) with dense output. Times are elapsed
/// flow time from `start`, always nonnegative.
#[derive(Clone, Debug)]
pub struct Path {
    pub direction: f64,
    pub start: Point,
    pub steps: Vec<DenseStep>,
}

impl Path {
    pub fn duration(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t1())
    }

    pub fn end(&self) -> Point {
        self.steps.last().map_or_else(|| self.start.clone(), |s| s.y1())
    }

    pub fn eval(&self, t: f64) -> Point {
        if self.steps.is_empty() || t <= 0.0 {
            return self.start.clone();
        }
        let i = self.steps.partition_point(|s| s.t1() < t).min(self.steps.len() - 1);
        self.steps[i].eval(t.min(self.steps[i].t1()))
    }

    /// ∫ β(γ̇) dt along the path, oriented along +v_β.
    pub fn beta_length(&self, form: &ContactForm) -> f64 {
        let mut acc = 0.0;
        for s in &self.steps {
            for (x, w) in GL5 {
                let t = s.t0 + x * s.h;
                let y = s.eval(t);
                let dy = s.deriv(t) * self.direction;
                acc += w * s.h * form.beta(&y).dot(&dy);
            }
        }
        acc
    }

    /// Step endpoints with their elapsed times, starting at the start point.
    pub fn samples(&self) -> Vec<(f64, Point)> {
        let mut out = vec![(0.0, self.start.clone())];
        out.extend(self.steps.iter().map(|s| (s.t1(), s.y1())));
        out
    }
}

/// A boundary event along a trajectory.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HitEvent {
    pub point: Vec<f64>,
    pub time: f64,
    pub multiplicity: usize,
    /// True iff the multiplicity is odd, i.e. the trajectory crosses ∂X.
    pub crossing: bool,
    pub h: f64,
}

impl HitEvent {
    pub fn point(&self) -> Point {
        Point::from_column_slice(&self.point)
    }
}

fn rhs_for<'a>(scene: &'a ContactScene, direction: f64) -> impl Fn(&Vector) -> Result<Vector> + 'a {
    move |y: &Vector| Ok(scene.reeb(y)? * direction)
}

fn solver<'a>(scene: &ContactScene, rhs: &'a (dyn Fn(&Vector) -> Result<Vector> + 'a)) -> Dopri5<'a> {
    let c = &scene.config;
    Dopri5::new(rhs, c.rtol, c.atol, c.max_step * scene.scale())
}

/// Integrates ẋ = direction·v_β from `start` for `max_time`, ignoring ∂X.
pub fn integrate(scene: &ContactScene, start: &Point, direction: f64, max_time: f64) -> Result<Path> {
    let dir = direction.signum();
    let rhs = rhs_for(scene, dir);
    let solver = solver(scene, &rhs);
    let mut y = start.clone();
    let mut k1 = solver.eval(&y)?;
    let mut h = solver.initial_step(&y, &k1);
    let mut t = 0.0;
    let mut steps = Vec::new();
    // Rounding can leave a sliver of time that no step can resolve.
    let slack = 1e-14 * max_time.max(1.0);
    while max_time - t > slack {
        let (step, k7, next) = solver.advance(t, &y, &k1, h.min(max_time - t))?;
        t = step.t1();
        y = step.y1();
        k1 = k7;
        h = next;
        steps.push(step);
    }
    Ok(Path { direction: dir, start: start.clone(), steps })
}

/// How a trajectory leaves a start point in a given direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StartKind {
    Interior,
    /// On ∂X, moving into X.
    Enters,
    /// On ∂X, moving out of X at once.
    Leaves,
}

/// Decides the start kind from the first Lie-tower level above threshold:
/// the path moves inward iff direction^k · g_k < 0.
pub fn classify_start(scene: &ContactScene, p: &Point, direction: f64) -> Result<(StartKind, Vec<f64>)> {
    let h = scene.h(p);
    let on = 1e-9 * scene.scale();
    if h < -on {
        return Ok((StartKind::Interior, vec![h]));
    }
    if h > on {
        return Err(Error::OutsideDomain { point: p.iter().copied().collect(), h });
    }
    let tower = scene.lie_tower(p, scene.max_depth())?;
    let k = scene.multiplicity(&tower).ok_or_else(|| Error::AmbiguousTangency {
        point: p.iter().copied().collect(),
        tower: tower.clone(),
    })?;
    let s = direction.signum().powi(k as i32) * tower[k];
    Ok((if s < 0.0 { StartKind::Enters } else { StartKind::Leaves }, tower))
}

pub(crate) fn hit_at(scene: &ContactScene, q: &Point, time: f64) -> Result<HitEvent> {
    let tower = scene.lie_tower(q, scene.max_depth())?;
    let m = scene
        .multiplicity(&tower)
        .ok_or_else(|| Error::AmbiguousTangency { point: q.iter().copied().collect(), tower: tower.clone() })?;
    Ok(HitEvent { point: q.iter().copied().collect(), time, multiplicity: m, crossing: m % 2 == 1, h: tower[0] })
}

fn bisect(mut a: f64, mut b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug)]
enum StepEvent {
    Touch(f64),
    Exit(f64),
}

/// Scans one dense step for a crossing of h = 0 or a near-tangential touch.
/// Events at times ≤ `t_skip` are ignored. Returns events in time order,
/// stopping at the first exit.
fn scan_step(scene: &ContactScene, step: &DenseStep, direction: f64, t_skip: f64) -> Result<Vec<StepEvent>> {
    let k = scene.config.probes.max(2);
    let eps_touch = scene.config.eps_touch * scene.scale();
    let hval = |t: f64| scene.h(&step.eval(t));
    let gval = |t: f64| -> f64 {
        let y = step.eval(t);
        match scene.reeb(&y) {
            Ok(v) => direction * scene.grad_h(&y).dot(&v),
            Err(_) => f64::NAN,
        }
    };
    let ts: Vec<f64> = (0..=k).map(|i| step.t0 + step.h * i as f64 / k as f64).collect();
    let mut hs: Vec<f64> = ts.iter().map(|&t| hval(t)).collect();
    hs[0] = hs[0].min(0.0);
    let gs: Vec<f64> = ts.iter().map(|&t| gval(t)).collect();
    let mut out = Vec::new();
    for i in 0..k {
        if ts[i + 1] <= t_skip {
            continue;
        }
        let left = ts[i].max(t_skip);
        if hs[i + 1] > 0.0 {
            let hl = if left > ts[i] { hval(left) } else { hs[i] };
            let te = if hl > 0.0 { left } else { bisect(left, ts[i + 1], &hval) };
            out.push(StepEvent::Exit(te));
            return Ok(out);
        }
        if gs[i] > 0.0 && gs[i + 1] < 0.0 {
            let tm = bisect(ts[i], ts[i + 1], &gval);
            if tm <= t_skip {
                continue;
            }
            let hm = hval(tm);
            if hm > eps_touch {
                let te = bisect(left.min(tm), tm, &hval);
                out.push(StepEvent::Exit(te));
                return Ok(out);
            } else if hm >= -eps_touch {
                out.push(StepEvent::Touch(tm));
            }
        }
    }
    Ok(out)
}

/// Newton polish of an exit time on h∘γ, moving along the flow with short RK jumps.
fn polish_exit(scene: &ContactScene, solver: &Dopri5, step: &DenseStep, t_guess: f64, direction: f64) -> Result<(f64, Point)> {
    let mut t = t_guess;
    let mut q = solver.jump(step.y0(), t - step.t0)?;
    let target = 1e-3 * scene.eps_hit();
    for _ in 0..8 {
        let h = scene.h(&q);
        if h.abs() <= target {
            break;
        }
        let g = direction * scene.g1(&q)?;
        if g.abs() < scene.tau(1) {
            break;
        }
        let dt = -h / g;
        if dt.abs() > 0.5 * step.h.abs().max(1e-12) {
            break;
        }
        q = solver.jump(&q, dt)?;
        t += dt;
    }
    Ok((t, q))
}

/// The result of following the flow from a start point until it leaves X.
#[derive(Clone, Debug)]
pub struct Traced {
    pub path: Path,
    pub kind: StartKind,
    /// Even-multiplicity touches passed on the way.
    pub touches: Vec<HitEvent>,
    pub exit: HitEvent,
}

/// Follows direction·v_β from `start` (in X or on ∂X) to the first genuine exit.
pub fn trace(scene: &ContactScene, start: &Point, direction: f64) -> Result<Traced> {
    let dir = direction.signum();
    let (kind, tower) = classify_start(scene, start, dir)?;
    if kind == StartKind::Leaves {
        let m = scene.multiplicity(&tower).unwrap_or(1);
        let exit = HitEvent { point: start.iter().copied().collect(), time: 0.0, multiplicity: m, crossing: m % 2 == 1, h: tower[0] };
        return Ok(Traced { path: Path { direction: dir, start: start.clone(), steps: vec![] }, kind, touches: vec![], exit });
    }
    let rhs = rhs_for(scene, dir);
    let solver = solver(scene, &rhs);
    let t_skip = if kind == StartKind::Enters { 1e-9 * scene.scale() } else { 0.0 };
    let max_time = scene.config.max_time * scene.scale();
    let mut y = start.clone();
    let mut k1 = solver.eval(&y)?;
    let mut h = solver.initial_step(&y, &k1).max(1e-4 * scene.scale()).min(solver.h_max);
    let mut t = 0.0;
    let mut steps: Vec<DenseStep> = Vec::new();
    let mut touches = Vec::new();
    loop {
        if t > max_time {
            return Err(Error::Trapped { max_time });
        }
        let (step, k7, next) = solver.advance(t, &y, &k1, h)?;
        for ev in scan_step(scene, &step, dir, t_skip)? {
            match ev {
                StepEvent::Touch(tm) => {
                    let q = solver.jump(step.y0(), tm - step.t0)?;
                    touches.push(hit_at(scene, &q, tm)?);
                }
                StepEvent::Exit(te) => {
                    let (te, _) = polish_exit(scene, &solver, &step, te, dir)?;
                    let te = te.clamp(step.t0, step.t1().max(te));
                    let last = if te - step.t0 > 1e-15 { Some(solver.partial(step.t0, step.y0(), te - step.t0)?) } else { None };
                    let q = last.as_ref().map_or_else(|| step.y0().clone(), |s| s.y1());
                    steps.extend(last);
                    let exit = hit_at(scene, &q, te)?;
                    return Ok(Traced { path: Path { direction: dir, start: start.clone(), steps }, kind, touches, exit });
                }
            }
        }
        t = step.t1();
        y = step.y1();
        k1 = k7;
        h = next;
        steps.push(step);
    }
}

/// First boundary event (touch or crossing) along an already integrated path.
pub fn next_boundary_hit(scene: &ContactScene, path: &Path) -> Result<Option<HitEvent>> {
    let dir = path.direction;
    let t_skip = if scene.h(&path.start).abs() <= 1e-9 * scene.scale() { 1e-9 * scene.scale() } else { 0.0 };
    let rhs = rhs_for(scene, dir);
    let solver = solver(scene, &rhs);
    for step in &path.steps {
        if let Some(ev) = scan_step(scene, step, dir, t_skip)?.into_iter().next() {
            return Ok(Some(match ev {
                StepEvent::Touch(tm) => hit_at(scene, &solver.jump(step.y0(), tm - step.t0)?, tm)?,
                StepEvent::Exit(te) => {
                    let (te, q) = polish_exit(scene, &solver, step, te, dir)?;
                    hit_at(scene, &q, te)?
                }
            }));
        }
    }
    Ok(None)
}
