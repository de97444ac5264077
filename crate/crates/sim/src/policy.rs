//! Synthetic players: where the eyes go (gaze policies) and what the hands
//! do (a shared aim-and-fire model).

use gazerun_core::attention::{resolve_attended, EntityId};
use gazerun_core::engine::{Engine, InputFrame};
use gazerun_core::geometry::{ray_aabb, Aabb, Camera, ScreenPoint, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Default gaze noise in normalized screen units. Assumes the display spans
/// about 30 degrees of the player's vertical field of view, so 1 degree of
/// tracker error is roughly 0.033 of the screen height.
pub const DEFAULT_SIGMA: f64 = 0.015;

/// Blind policy's default fixation: the top-left corner, which no gaze box
/// can reach.
pub const BLIND_POINT: ScreenPoint = ScreenPoint { u: 0.0, v: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub enum GazePolicy {
    /// Looks at the nearest entity not yet noticed, at its centre or else at
    /// whatever part of it is visible, and stays on it until it is noticed.
    Perfect,
    /// Gaussian noise of standard deviation `sigma` around another policy.
    Jittered { sigma: f64, inner: Box<GazePolicy> },
    /// Stares at one fixed point.
    Blind(ScreenPoint),
    /// Replays recorded frames verbatim, including aim and fire.
    Scripted(Vec<InputFrame>),
}

impl GazePolicy {
    pub fn jittered_perfect(sigma: f64) -> Self {
        GazePolicy::Jittered {
            sigma,
            inner: Box::new(GazePolicy::Perfect),
        }
    }

    pub fn blind() -> Self {
        GazePolicy::Blind(BLIND_POINT)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GazePolicy::Perfect => "perfect",
            GazePolicy::Jittered { .. } => "jitter",
            GazePolicy::Blind(_) => "blind",
            GazePolicy::Scripted(_) => "trace",
        }
    }
}

/// Screen position of a gaze box's centre, if it lies on screen.
pub fn project_gaze(camera: &Camera, gaze_box: &Aabb) -> Option<ScreenPoint> {
    camera.project(gaze_box.center()).filter(ScreenPoint::is_inside)
}

/// Mutable per-session state of a gaze policy.
pub struct GazeDriver {
    policy: GazePolicy,
    target: Option<EntityId>,
    noise: ChaCha8Rng,
    inner: Option<Box<GazeDriver>>,
}

impl GazeDriver {
    pub fn new(policy: GazePolicy, seed: u64) -> Self {
        let inner = match &policy {
            GazePolicy::Jittered { inner, .. } => Some(Box::new(GazeDriver::new((**inner).clone(), seed))),
            _ => None,
        };
        let mut noise = ChaCha8Rng::seed_from_u64(seed);
        noise.set_stream(0x6a17);
        Self {
            policy,
            target: None,
            noise,
            inner,
        }
    }

    /// Currently pursued entity, for the perfect policy.
    pub fn target(&self) -> Option<EntityId> {
        self.target
    }

    pub fn gaze(&mut self, engine: &Engine) -> Option<ScreenPoint> {
        match &self.policy {
            GazePolicy::Perfect => Some(self.perfect(engine)),
            GazePolicy::Jittered { sigma, .. } => {
                let sigma = *sigma;
                let base = self.inner.as_mut().expect("jitter wraps a policy").gaze(engine)?;
                if sigma <= 0.0 {
                    return Some(base);
                }
                let n = Normal::new(0.0, sigma).expect("positive sigma");
                let du = n.sample(&mut self.noise);
                let dv = n.sample(&mut self.noise);
                Some(ScreenPoint::clamped(base.u + du, base.v + dv).expect("finite"))
            }
            GazePolicy::Blind(p) => Some(*p),
            GazePolicy::Scripted(_) => None,
        }
    }

    fn perfect(&mut self, engine: &Engine) -> ScreenPoint {
        let camera = engine.camera();
        let all: Vec<(EntityId, Aabb)> = engine.attendables().map(|a| (a.id, a.gaze_box)).collect();
        let current = self.target.and_then(|id| {
            engine
                .attendables()
                .find(|a| a.id == id && !a.attention.is_noticed())
                .and_then(|a| visible_point(&camera, a.id, &a.gaze_box, &all))
        });
        if let Some(p) = current {
            return p;
        }
        // nearest unnoticed entity that is not fully hidden behind another
        let next = engine
            .attendables()
            .filter(|a| !a.attention.is_noticed())
            .filter_map(|a| {
                let p = visible_point(&camera, a.id, &a.gaze_box, &all)?;
                let t = ray_aabb(&camera.gaze_ray(p).ok()?, &a.gaze_box)?;
                Some((t, a.id, p))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        match next {
            Some((_, id, p)) => {
                self.target = Some(id);
                p
            }
            None => {
                self.target = None;
                ScreenPoint::CENTER
            }
        }
    }
}

const PROBE_GRID: usize = 9;

/// A screen point whose gaze ray lands on `id` first, given every attendable
/// box in `all`. Tries the projected centre, then a grid over the box's
/// screen footprint ordered by distance from the centre.
pub fn visible_point(camera: &Camera, id: EntityId, gaze_box: &Aabb, all: &[(EntityId, Aabb)]) -> Option<ScreenPoint> {
    let centre = project_gaze(camera, gaze_box)?;
    let lands = |p: ScreenPoint| {
        camera
            .gaze_ray(p)
            .ok()
            .is_some_and(|r| resolve_attended(&r, all.iter().copied()) == Some(id))
    };
    if lands(centre) {
        return Some(centre);
    }
    let (lo, hi) = (gaze_box.min, gaze_box.max);
    let mut corners = Vec::with_capacity(8);
    for i in 0..8 {
        let c = Vec3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        );
        corners.push(camera.project(c)?);
    }
    let umin = corners.iter().map(|p| p.u).fold(f64::INFINITY, f64::min).max(0.0);
    let umax = corners.iter().map(|p| p.u).fold(f64::NEG_INFINITY, f64::max).min(1.0);
    let vmin = corners.iter().map(|p| p.v).fold(f64::INFINITY, f64::min).max(0.0);
    let vmax = corners.iter().map(|p| p.v).fold(f64::NEG_INFINITY, f64::max).min(1.0);
    let n = PROBE_GRID as f64;
    let mut probes: Vec<ScreenPoint> = (0..PROBE_GRID)
        .flat_map(|i| (0..PROBE_GRID).map(move |j| (i, j)))
        .map(|(i, j)| ScreenPoint {
            u: umin + (umax - umin) * (i as f64 + 0.5) / n,
            v: vmin + (vmax - vmin) * (j as f64 + 0.5) / n,
        })
        .collect();
    let d2 = |p: &ScreenPoint| (p.u - centre.u).powi(2) + (p.v - centre.v).powi(2);
    probes.sort_by(|a, b| d2(a).total_cmp(&d2(b)));
    probes.into_iter().find(|p| lands(*p))
}

/// Aim-and-fire model shared by every synthetic gaze policy: slews the
/// crosshair toward the nearest walking enemy within range and fires when
/// the shot would land, subject to a cooldown.
#[derive(Debug, Clone, PartialEq)]
pub struct Trigger {
    pub engage_range: f64,
    /// Crosshair speed in screen units per second.
    pub slew_rate: f64,
    pub fire_interval: f64,
    cooldown: f64,
}

impl Default for Trigger {
    fn default() -> Self {
        Self {
            engage_range: 18.0,
            slew_rate: 1.2,
            fire_interval: 0.6,
            cooldown: 0.0,
        }
    }
}

impl Trigger {
    /// Returns `(aim_du, aim_dv, fire)` for the next tick.
    pub fn act(&mut self, engine: &Engine) -> (f64, f64, bool) {
        let dt = engine.config().timestep;
        self.cooldown = (self.cooldown - dt).max(0.0);
        let camera = engine.camera();
        let avatar_z = engine.avatar().z;
        let target = engine
            .enemies()
            .iter()
            .filter(|e| e.is_shootable())
            .filter(|e| {
                let ahead = e.position.z - avatar_z;
                ahead > 0.0 && ahead <= self.engage_range
            })
            .filter_map(|e| project_gaze(&camera, &e.box_b).map(|p| (e, p)))
            .min_by(|a, b| a.0.position.z.total_cmp(&b.0.position.z).then(a.0.id.cmp(&b.0.id)));
        let Some((enemy, want)) = target else {
            return (0.0, 0.0, false);
        };
        let cross = engine.avatar().crosshair;
        let step = self.slew_rate * dt;
        let du = (want.u - cross.u).clamp(-step, step);
        let dv = (want.v - cross.v).clamp(-step, step);
        let aimed = ScreenPoint::clamped(cross.u + du, cross.v + dv).expect("finite");
        let on_target = camera
            .gaze_ray(aimed)
            .ok()
            .and_then(|r| ray_aabb(&r, &enemy.box_b))
            .is_some();
        let fire = on_target && self.cooldown <= 0.0;
        if fire {
            self.cooldown = self.fire_interval;
        }
        (du, dv, fire)
    }
}

/// A full synthetic player.
pub struct Player {
    gaze: GazeDriver,
    trigger: Trigger,
    script: Option<std::vec::IntoIter<InputFrame>>,
    pending: Option<InputFrame>,
}

impl Player {
    pub fn new(policy: GazePolicy, seed: u64) -> Self {
        let script = match &policy {
            GazePolicy::Scripted(frames) => Some(frames.clone().into_iter()),
            _ => None,
        };
        Self {
            gaze: GazeDriver::new(policy, seed),
            trigger: Trigger::default(),
            script,
            pending: None,
        }
    }

    pub fn with_trigger(mut self, trigger: Trigger) -> Self {
        self.trigger = trigger;
        self
    }

    /// Input for the engine's next tick.
    pub fn frame(&mut self, engine: &Engine) -> InputFrame {
        let tick = engine.tick_index();
        if let Some(script) = self.script.as_mut() {
            if self.pending.is_none() {
                self.pending = script.next();
            }
            return match self.pending {
                Some(f) if f.tick == tick => self.pending.take().expect("present"),
                _ => InputFrame::empty(tick),
            };
        }
        let gaze = self.gaze.gaze(engine);
        let (aim_du, aim_dv, fire) = self.trigger.act(engine);
        InputFrame {
            tick,
            gaze,
            aim_du,
            aim_dv,
            fire,
        }
    }
}
