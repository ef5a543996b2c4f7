//! NHPP arrival generation by cumulative-intensity inversion and by thinning.
//!
//! Randomness comes from [`RngStream`], a ChaCha8 generator keyed by a
//! `(seed, stream_index)` pair. Replications own one stream each, so results
//! do not depend on how replications are spread over worker threads.

use crate::error::{Error, Result};
use crate::rate_model::RateModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based random stream for one replication.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RngStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Exponential(1) draw by inverse CDF.
    pub fn exp1(&mut self) -> f64 {
        -(-self.uniform()).ln_1p()
    }
}

/// Sampling method for NHPP arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Thinning,
    #[default]
    Inversion,
}

/// Next arrival after `t` given a unit-exponential variate `e`:
/// `Λ⁻¹(Λ(0, t) + e)`. `None` when the remaining mass is below `e`.
pub fn arrival_from_exponential(model: &RateModel, t: f64, e: f64) -> Result<Option<f64>> {
    let base = model.cumulative_intensity(0.0, t)?;
    match model.inverse_cumulative(base + e) {
        Ok(s) => Ok(Some(s.max(t))),
        Err(Error::Unreachable { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Next NHPP arrival strictly after `t` by inversion of the cumulative
/// intensity. `None` means no further arrival ever occurs (the model has
/// finite total intensity and the draw exceeded it).
pub fn next_arrival_inversion(model: &RateModel, t: f64, rng: &mut RngStream) -> Result<Option<f64>> {
    let e = rng.exp1();
    arrival_from_exponential(model, t, e)
}

/// Next NHPP arrival after `t` by thinning a homogeneous process at the
/// global majorant `λ̄·f₊`.
pub fn next_arrival_thinning(model: &RateModel, t: f64, rng: &mut RngStream) -> Result<Option<f64>> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let meta = model.metadata();
    let rate_max = meta.rate_max().ok_or(Error::Unavailable("f_plus (thinning majorant)"))?;
    if rate_max <= 0.0 {
        return Ok(None);
    }
    // Past the tail time a zero rate never produces another arrival.
    let dead_after = match (meta.tail_time, meta.tail_rate) {
        (Some(t0), Some(r)) if r <= 0.0 => Some(t0),
        _ => None,
    };
    let mut s = t;
    loop {
        s += rng.exp1() / rate_max;
        if dead_after.is_some_and(|t0| s >= t0) {
            return Ok(None);
        }
        let accept = model.rate_unchecked(s) / rate_max;
        if rng.uniform() < accept {
            return Ok(Some(s));
        }
    }
}

/// Draws the next arrival after `t` with the chosen method.
pub fn next_arrival(model: &RateModel, t: f64, method: SamplingMethod, rng: &mut RngStream) -> Result<Option<f64>> {
    match method {
        SamplingMethod::Inversion => next_arrival_inversion(model, t, rng),
        SamplingMethod::Thinning => next_arrival_thinning(model, t, rng),
    }
}

/// All arrivals in `[0, horizon]`, ascending.
pub fn sample_path(model: &RateModel, horizon: f64, method: SamplingMethod, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be > 0, got {horizon}")));
    }
    let mut path = Vec::new();
    let mut t = 0.0;
    while let Some(s) = next_arrival(model, t, method, rng)? {
        if s > horizon {
            break;
        }
        // Inversion can return the same float for two arrivals closer than
        // one ulp; they are a single event at that resolution.
        if path.last().is_none_or(|&p| s > p) {
            path.push(s);
        }
        t = s;
    }
    Ok(path)
}

/// A source of disruption epochs consumed by the simulator.
pub trait ArrivalSource {
    /// First arrival strictly after `t`, or `None` if there is none.
    fn next_after(&mut self, t: f64) -> Result<Option<f64>>;
}

/// Lazily generated NHPP path: arrivals are drawn one at a time from the
/// last generated point, so a sample path is a deterministic function of
/// the stream.
#[derive(Debug)]
pub struct LazyPath<'a> {
    model: &'a RateModel,
    method: SamplingMethod,
    rng: RngStream,
    last: f64,
    pending: Option<Option<f64>>,
}

impl<'a> LazyPath<'a> {
    pub fn new(model: &'a RateModel, method: SamplingMethod, rng: RngStream) -> Self {
        LazyPath {
            model,
            method,
            rng,
            last: 0.0,
            pending: None,
        }
    }
}

impl ArrivalSource for LazyPath<'_> {
    fn next_after(&mut self, t: f64) -> Result<Option<f64>> {
        loop {
            let next = match self.pending {
                Some(p) => p,
                None => {
                    let p = next_arrival(self.model, self.last, self.method, &mut self.rng)?;
                    self.pending = Some(p);
                    p
                }
            };
            match next {
                None => return Ok(None),
                Some(s) if s > t => return Ok(Some(s)),
                Some(s) => {
                    self.last = s;
                    self.pending = None;
                }
            }
        }
    }
}

/// A fixed, pre-recorded arrival path (ascending).
#[derive(Debug, Clone)]
pub struct ReplayPath {
    arrivals: Vec<f64>,
    cursor: usize,
}

impl ReplayPath {
    pub fn new(mut arrivals: Vec<f64>) -> Self {
        arrivals.sort_by(f64::total_cmp);
        ReplayPath { arrivals, cursor: 0 }
    }
}

impl ArrivalSource for ReplayPath {
    fn next_after(&mut self, t: f64) -> Result<Option<f64>> {
        if self.cursor > 0 && self.arrivals[self.cursor - 1] > t {
            self.cursor = self.arrivals.partition_point(|&s| s <= t);
        }
        while self.cursor < self.arrivals.len() && self.arrivals[self.cursor] <= t {
            self.cursor += 1;
        }
        Ok(self.arrivals.get(self.cursor).copied())
    }
}
