//! Poisson topologies around a typical link whose receiver sits at the origin.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bipolar::BipolarConfig;
use crate::cellular::CellularConfig;
use crate::error::{Error, Result};

/// Window halfwidth in units of the mean nearest-neighbour spacing 1/(2√λ).
pub const DEFAULT_WINDOW_SPACINGS: f64 = 80.0;

/// Below this expected interferer count the window is considered too small.
pub const SMALL_WINDOW_COUNT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetworkKind {
    Bipolar,
    Cellular,
}

/// One sampled network.
///
/// In the bipolar model transmitter i talks to receiver i. In the cellular
/// model receivers are the fusion centers and `association[i]` is the
/// nearest center of sensor i. The typical receiver is at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub kind: NetworkKind,
    pub transmitters: Vec<[f64; 2]>,
    pub receivers: Vec<[f64; 2]>,
    pub association: Vec<usize>,
    pub link_distances: Vec<f64>,
    pub typical_index: usize,
    pub window_halfwidth: f64,
    pub torus_wrap: bool,
    pub seed: u64,
    /// Cellular only: how many draws had no sensor in the typical cell.
    pub resamples: u32,
    /// Expected number of transmitters in the window.
    pub expected_count: f64,
}

impl NetworkRealization {
    pub fn window_too_small(&self) -> bool {
        self.expected_count < SMALL_WINDOW_COUNT
    }

    pub fn typical_distance(&self) -> f64 {
        self.link_distances[self.typical_index]
    }

    /// Distance between two points under the window's metric.
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        metric(a, b, self.window_halfwidth, self.torus_wrap)
    }

    /// Distances from the origin to every transmitter except the typical one.
    pub fn interferer_distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.transmitters
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.typical_index)
            .map(|(_, x)| x[0].hypot(x[1]))
    }
}

fn metric(a: [f64; 2], b: [f64; 2], w: f64, torus: bool) -> f64 {
    let mut dx = (a[0] - b[0]).abs();
    let mut dy = (a[1] - b[1]).abs();
    if torus {
        dx = dx.min(2.0 * w - dx);
        dy = dy.min(2.0 * w - dy);
    }
    dx.hypot(dy)
}

pub fn default_window_bipolar(cfg: &BipolarConfig) -> f64 {
    if cfg.lambda > 0.0 {
        DEFAULT_WINDOW_SPACINGS / (2.0 * cfg.lambda.sqrt())
    } else {
        4.0 * cfg.r
    }
}

pub fn default_window_cellular(cfg: &CellularConfig) -> f64 {
    DEFAULT_WINDOW_SPACINGS / (2.0 * cfg.lambda_d.sqrt())
}

fn uniform_points<R: Rng>(rng: &mut R, mean: f64, w: f64) -> Vec<[f64; 2]> {
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("positive Poisson mean").sample(rng) as usize
    } else {
        0
    };
    (0..n)
        .map(|_| [rng.random_range(-w..w), rng.random_range(-w..w)])
        .collect()
}

fn check_window(w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter(format!("window halfwidth must be positive, got {w}")));
    }
    Ok(())
}

/// Typical pair plus a Poisson field of interfering pairs on [−w, w]².
pub fn sample_bipolar(cfg: &BipolarConfig, window_halfwidth: f64, seed: u64) -> Result<NetworkRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut real = sample_bipolar_with(cfg, window_halfwidth, true, &mut rng)?;
    real.seed = seed;
    Ok(real)
}

pub(crate) fn sample_bipolar_with<R: Rng>(
    cfg: &BipolarConfig,
    w: f64,
    torus_wrap: bool,
    rng: &mut R,
) -> Result<NetworkRealization> {
    check_window(w)?;
    let expected_count = cfg.lambda * 4.0 * w * w;
    let mut transmitters = vec![];
    let mut receivers = vec![];
    let phi = rng.random_range(0.0..2.0 * PI);
    transmitters.push([cfg.r * phi.cos(), cfg.r * phi.sin()]);
    receivers.push([0.0, 0.0]);
    for x in uniform_points(rng, expected_count, w) {
        let phi = rng.random_range(0.0..2.0 * PI);
        let mut y = [x[0] + cfg.r * phi.cos(), x[1] + cfg.r * phi.sin()];
        if torus_wrap {
            for c in &mut y {
                *c = wrap(*c, w);
            }
        }
        transmitters.push(x);
        receivers.push(y);
    }
    let n = transmitters.len();
    Ok(NetworkRealization {
        kind: NetworkKind::Bipolar,
        transmitters,
        receivers,
        association: (0..n).collect(),
        link_distances: vec![cfg.r; n],
        typical_index: 0,
        window_halfwidth: w,
        torus_wrap,
        seed: 0,
        resamples: 0,
        expected_count,
    })
}

fn wrap(x: f64, w: f64) -> f64 {
    (x + w).rem_euclid(2.0 * w) - w
}

/// Bucket grid for nearest-center queries.
struct Grid {
    cells: Vec<Vec<usize>>,
    n: usize,
    h: f64,
    w: f64,
}

impl Grid {
    fn new(points: &[[f64; 2]], w: f64, density: f64) -> Self {
        let n = ((2.0 * w * density.sqrt()).ceil() as usize).clamp(1, 2048);
        let h = 2.0 * w / n as f64;
        let mut cells = vec![vec![]; n * n];
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = (Self::index(p[0], w, h, n), Self::index(p[1], w, h, n));
            cells[cy * n + cx].push(i);
        }
        Grid { cells, n, h, w }
    }

    fn index(x: f64, w: f64, h: f64, n: usize) -> usize {
        (((x + w) / h) as usize).min(n - 1)
    }

    fn nearest(&self, points: &[[f64; 2]], x: [f64; 2], torus: bool) -> (usize, f64) {
        let n = self.n as i64;
        let cx = Self::index(x[0], self.w, self.h, self.n) as i64;
        let cy = Self::index(x[1], self.w, self.h, self.n) as i64;
        let mut best = (usize::MAX, f64::INFINITY);
        let mut k = 0i64;
        loop {
            for dy in -k..=k {
                for dx in -k..=k {
                    if dx.abs() != k && dy.abs() != k {
                        continue;
                    }
                    let (mut gx, mut gy) = (cx + dx, cy + dy);
                    if torus {
                        gx = gx.rem_euclid(n);
                        gy = gy.rem_euclid(n);
                    } else if gx < 0 || gy < 0 || gx >= n || gy >= n {
                        continue;
                    }
                    for &j in &self.cells[(gy * n + gx) as usize] {
                        let d = metric(points[j], x, self.w, torus);
                        if d < best.1 {
                            best = (j, d);
                        }
                    }
                }
            }
            // rings 0..=k cover every point within distance k·h
            let covered_all = if torus { 2 * k + 1 >= n } else { k >= n };
            if best.1 <= k as f64 * self.h || covered_all {
                return best;
            }
            k += 1;
        }
    }
}

/// Poisson sensors and centers with nearest-center association. The typical
/// link is a uniformly chosen sensor of the center placed at the origin.
pub fn sample_cellular(cfg: &CellularConfig, window_halfwidth: f64, seed: u64) -> Result<NetworkRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut real = sample_cellular_with(cfg, window_halfwidth, true, &mut rng)?;
    real.seed = seed;
    Ok(real)
}

pub(crate) fn sample_cellular_with<R: Rng>(
    cfg: &CellularConfig,
    w: f64,
    torus_wrap: bool,
    rng: &mut R,
) -> Result<NetworkRealization> {
    check_window(w)?;
    if cfg.lambda_s <= 0.0 {
        return Err(Error::InvalidParameter(
            "the cellular simulator needs sensors (lambda_s > 0)".into(),
        ));
    }
    let area = 4.0 * w * w;
    let mut resamples = 0u32;
    loop {
        let mut centers = vec![[0.0, 0.0]];
        centers.extend(uniform_points(rng, cfg.lambda_d * area, w));
        let sensors = uniform_points(rng, cfg.lambda_s * area, w);
        let grid = Grid::new(&centers, w, cfg.lambda_d);
        let mut association = Vec::with_capacity(sensors.len());
        let mut link_distances = Vec::with_capacity(sensors.len());
        for &x in &sensors {
            let (j, d) = grid.nearest(&centers, x, torus_wrap);
            association.push(j);
            link_distances.push(d);
        }
        let own: Vec<usize> = (0..sensors.len()).filter(|&i| association[i] == 0).collect();
        if own.is_empty() {
            resamples += 1;
            if resamples > 10_000 {
                return Err(Error::InvalidParameter(
                    "the typical cell stayed empty in 10000 draws; lambda_s is too small".into(),
                ));
            }
            continue;
        }
        let typical_index = own[rng.random_range(0..own.len())];
        return Ok(NetworkRealization {
            kind: NetworkKind::Cellular,
            transmitters: sensors,
            receivers: centers,
            association,
            link_distances,
            typical_index,
            window_halfwidth: w,
            torus_wrap,
            seed: 0,
            resamples,
            expected_count: cfg.lambda_s * area,
        });
    }
}
