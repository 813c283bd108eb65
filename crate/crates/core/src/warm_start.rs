//! Initial ansatz parameters: uniform random draws or one of three
//! population metaheuristics (Black Hole, Gray Wolf, Artificial Bee Colony)
//! minimising the exact ansatz energy.
//!
//! Every method keeps the best `(θ, E)` it has ever evaluated, so the result
//! is never worse than the initial population. Angles are wrapped into
//! `[0, 2π)` after every move.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{DvqeError, Result};
use crate::streams::{stream_rng, Stream};

/// Energy of a parameter vector. Must be deterministic.
pub trait EnergyObjective {
    fn energy(&self, theta: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> EnergyObjective for F {
    fn energy(&self, theta: &[f64]) -> f64 {
        self(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitType {
    Random = 1,
    BlackHole = 2,
    GrayWolf = 3,
    BeeColony = 4,
}

impl InitType {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Self::Random),
            2 => Ok(Self::BlackHole),
            3 => Ok(Self::GrayWolf),
            4 => Ok(Self::BeeColony),
            other => Err(DvqeError::Config(format!("init_type must be 1..=4, got {other}"))),
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitConfig {
    pub init_type: InitType,
    pub population: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub abc_limit: usize,
}

impl InitConfig {
    pub fn new(init_type: InitType, seed: u64) -> Self {
        Self {
            init_type,
            population: 20,
            max_iter: 50,
            seed,
            abc_limit: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min_pop = match self.init_type {
            InitType::Random => 1,
            InitType::GrayWolf => 4,
            _ => 2,
        };
        if self.population < min_pop {
            return Err(DvqeError::Config(format!(
                "population {} too small for {:?} (need ≥ {min_pop})",
                self.population, self.init_type
            )));
        }
        if self.max_iter == 0 || self.abc_limit == 0 {
            return Err(DvqeError::Config(
                "max_iter and abc_limit must be positive".into(),
            ));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        stream_rng(self.seed, Stream::Init(self.init_type.code()))
    }
}

/// Result of a warm start.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub theta: Vec<f64>,
    /// `None` for plain random initialisation, which never evaluates energy.
    pub energy: Option<f64>,
}

pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn random_vector<R: Rng>(rng: &mut R, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(0.0..TAU)).collect()
}

/// `θᵢ ~ U[0, 2π)`, seeded.
pub fn random_init(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, Stream::Init(InitType::Random.code()));
    random_vector(&mut rng, p)
}

/// Dispatches on `cfg.init_type`.
pub fn warm_start(obj: &dyn EnergyObjective, p: usize, cfg: &InitConfig) -> Result<WarmStart> {
    cfg.validate()?;
    if p == 0 {
        return Err(DvqeError::Config("parameter count must be positive".into()));
    }
    let best = match cfg.init_type {
        InitType::Random => {
            return Ok(WarmStart {
                theta: random_init(p, cfg.seed),
                energy: None,
            })
        }
        InitType::BlackHole => black_hole_init(obj, p, cfg)?,
        InitType::GrayWolf => gray_wolf_init(obj, p, cfg)?,
        InitType::BeeColony => bee_colony_init(obj, p, cfg)?,
    };
    Ok(WarmStart {
        theta: best.0,
        energy: Some(best.1),
    })
}

struct BestSoFar {
    theta: Vec<f64>,
    energy: f64,
}

impl BestSoFar {
    fn from_population(pop: &[Vec<f64>], energies: &[f64]) -> Self {
        let i = argmin(energies);
        Self {
            theta: pop[i].clone(),
            energy: energies[i],
        }
    }

    fn offer(&mut self, theta: &[f64], energy: f64) {
        if energy < self.energy {
            self.energy = energy;
            self.theta.copy_from_slice(theta);
        }
    }

    fn into_pair(self) -> (Vec<f64>, f64) {
        (self.theta, self.energy)
    }
}

// first index of the minimum; NaN never wins
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

fn evaluate(obj: &dyn EnergyObjective, theta: &[f64]) -> Result<f64> {
    let e = obj.energy(theta);
    if !e.is_finite() {
        return Err(DvqeError::Numeric {
            iteration: 0,
            message: format!("warm-start objective returned {e}"),
        });
    }
    Ok(e)
}

fn initial_population<R: Rng>(
    obj: &dyn EnergyObjective,
    rng: &mut R,
    n: usize,
    p: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let pop: Vec<Vec<f64>> = (0..n).map(|_| random_vector(rng, p)).collect();
    let energies = pop.iter().map(|x| evaluate(obj, x)).collect::<Result<Vec<_>>>()?;
    Ok((pop, energies))
}

/// Black Hole search. Stars move toward the best star by a random scalar
/// fraction; any star that lands within the event horizon is re-drawn.
pub fn black_hole_init(obj: &dyn EnergyObjective, p: usize, cfg: &InitConfig) -> Result<(Vec<f64>, f64)> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let (mut stars, mut energies) = initial_population(obj, &mut rng, cfg.population, p)?;
    let mut best = BestSoFar::from_population(&stars, &energies);
    let mut hole = argmin(&energies);

    for _ in 0..cfg.max_iter {
        for i in 0..stars.len() {
            if i == hole {
                continue;
            }
            let r: f64 = rng.gen();
            for d in 0..p {
                let delta = stars[hole][d] - stars[i][d];
                stars[i][d] = wrap_angle(stars[i][d] + r * delta);
            }
            energies[i] = evaluate(obj, &stars[i])?;
            best.offer(&stars[i], energies[i]);
            if energies[i] < energies[hole] {
                hole = i;
            }
        }

        let radius = event_horizon(&energies, hole);
        for i in 0..stars.len() {
            if i != hole && distance(&stars[i], &stars[hole]) < radius {
                stars[i] = random_vector(&mut rng, p);
                energies[i] = evaluate(obj, &stars[i])?;
                best.offer(&stars[i], energies[i]);
                if energies[i] < energies[hole] {
                    hole = i;
                }
            }
        }
    }
    Ok(best.into_pair())
}

/// `R = f_BH / Σ fᵢ` with shifted fitness `fᵢ = Eᵢ − min E + 1e-9`.
pub fn event_horizon(energies: &[f64], hole: usize) -> f64 {
    const EPS0: f64 = 1e-9;
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = energies.iter().map(|e| e - min + EPS0).sum();
    (energies[hole] - min + EPS0) / total
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One gray-wolf move of `x` guided by the three leaders at coefficient `a`.
pub fn gray_wolf_move<R: Rng>(x: &[f64], leaders: [&[f64]; 3], a: f64, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for leader in leaders {
        for d in 0..x.len() {
            let r1: f64 = rng.gen();
            let r2: f64 = rng.gen();
            let big_a = 2.0 * a * r1 - a;
            let big_c = 2.0 * r2;
            let dist = (big_c * leader[d] - x[d]).abs();
            out[d] += leader[d] - big_a * dist;
        }
    }
    out.into_iter().map(|v| wrap_angle(v / 3.0)).collect()
}

/// Linear schedule from 2 at the first iteration to 0 at the last.
pub fn gray_wolf_coefficient(iter: usize, max_iter: usize) -> f64 {
    if max_iter <= 1 {
        return 0.0;
    }
    2.0 * (1.0 - iter as f64 / (max_iter - 1) as f64)
}

/// Gray Wolf optimiser: α, β, δ lead; every other wolf moves to the average
/// of its three leader-guided positions.
pub fn gray_wolf_init(obj: &dyn EnergyObjective, p: usize, cfg: &InitConfig) -> Result<(Vec<f64>, f64)> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let (mut wolves, mut energies) = initial_population(obj, &mut rng, cfg.population, p)?;
    let mut best = BestSoFar::from_population(&wolves, &energies);

    for iter in 0..cfg.max_iter {
        let a = gray_wolf_coefficient(iter, cfg.max_iter);
        let mut order: Vec<usize> = (0..wolves.len()).collect();
        order.sort_by(|&i, &j| energies[i].total_cmp(&energies[j]).then(i.cmp(&j)));
        let leaders: Vec<Vec<f64>> = order[..3].iter().map(|&i| wolves[i].clone()).collect();
        for &i in &order[3..] {
            wolves[i] = gray_wolf_move(&wolves[i], [&leaders[0], &leaders[1], &leaders[2]], a, &mut rng);
            energies[i] = evaluate(obj, &wolves[i])?;
            best.offer(&wolves[i], energies[i]);
        }
    }
    Ok(best.into_pair())
}

/// Selection weights `fitᵢ / Σ fit` with `fitᵢ = 1 / (1 + Eᵢ − min E)`.
pub fn bee_fitness_weights(energies: &[f64]) -> Vec<f64> {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let fit: Vec<f64> = energies.iter().map(|e| 1.0 / (1.0 + (e - min))).collect();
    let total: f64 = fit.iter().sum();
    fit.into_iter().map(|f| f / total).collect()
}

fn bee_neighbor<R: Rng>(sources: &[Vec<f64>], i: usize, rng: &mut R) -> Vec<f64> {
    let p = sources[i].len();
    let n = sources.len();
    let d = rng.gen_range(0..p);
    let mut k = rng.gen_range(0..n - 1);
    if k >= i {
        k += 1;
    }
    let phi: f64 = rng.gen_range(-1.0..=1.0);
    let mut v = sources[i].clone();
    v[d] = wrap_angle(v[d] + phi * (v[d] - sources[k][d]));
    v
}

/// Artificial Bee Colony with employed, onlooker and scout phases.
pub fn bee_colony_init(obj: &dyn EnergyObjective, p: usize, cfg: &InitConfig) -> Result<(Vec<f64>, f64)> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let n = cfg.population;
    let (mut sources, mut energies) = initial_population(obj, &mut rng, n, p)?;
    let mut trials = vec![0usize; n];
    let mut best = BestSoFar::from_population(&sources, &energies);

    let try_improve = |i: usize,
                       sources: &mut Vec<Vec<f64>>,
                       energies: &mut Vec<f64>,
                       trials: &mut Vec<usize>,
                       best: &mut BestSoFar,
                       rng: &mut ChaCha8Rng|
     -> Result<()> {
        let candidate = bee_neighbor(sources, i, rng);
        let e = evaluate(obj, &candidate)?;
        best.offer(&candidate, e);
        if e < energies[i] {
            sources[i] = candidate;
            energies[i] = e;
            trials[i] = 0;
        } else {
            trials[i] += 1;
        }
        Ok(())
    };

    for _ in 0..cfg.max_iter {
        for i in 0..n {
            try_improve(i, &mut sources, &mut energies, &mut trials, &mut best, &mut rng)?;
        }

        let weights = bee_fitness_weights(&energies);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            try_improve(
                pick,
                &mut sources,
                &mut energies,
                &mut trials,
                &mut best,
                &mut rng,
            )?;
        }

        for i in 0..n {
            if trials[i] >= cfg.abc_limit {
                sources[i] = random_vector(&mut rng, p);
                energies[i] = evaluate(obj, &sources[i])?;
                best.offer(&sources[i], energies[i]);
                trials[i] = 0;
            }
        }
    }
    Ok(best.into_pair())
}
