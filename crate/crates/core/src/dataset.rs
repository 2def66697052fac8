//! Property-record schema, CSV ingestion, one-hot encoding, seeded synthetic
//! generation, and train/test splitting.
//!
//! The CSV layout is: header row, UTF-8, columns exactly
//! `rent_price, years_built, walk_time, n_rooms, floor_area_ratio, x_km,
//! y_km, direction, structure, layout, use_district`. Empty fields mark
//! missing data; rows with any missing field are dropped and counted.

use crate::error::{Error, Result};
use crate::geom::Point;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::path::Path;

macro_rules! categorical {
    ($name:ident, $column:literal, { $($variant:ident => $label:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            pub fn parse(s: &str) -> Result<Self> {
                match s {
                    $($label => Ok($name::$variant),)+
                    _ => Err(Error::Schema(format!(
                        "unknown {} label {s:?}", $column
                    ))),
                }
            }

            /// Position within the fixed vocabulary; 0 is the reference level.
            pub fn index(self) -> usize {
                Self::ALL.iter().position(|v| *v == self).unwrap()
            }
        }
    };
}

categorical!(Direction, "direction", {
    North => "North",
    Northeast => "Northeast",
    East => "East",
    Southeast => "Southeast",
    South => "South",
    Southwest => "Southwest",
    West => "West",
    Northwest => "Northwest",
    Others => "Others",
});

categorical!(Structure, "structure", {
    W => "W",
    B => "B",
    S => "S",
    Rc => "RC",
    Src => "SRC",
    Pc => "PC",
    Hpc => "HPC",
    Ls => "LS",
    Alc => "ALC",
    Rcb => "RCB",
    Others => "Others",
});

categorical!(Layout, "layout", {
    R => "R",
    K => "K",
    Sk => "SK",
    Dk => "DK",
    Sdk => "SDK",
    Lk => "LK",
    Slk => "SLK",
    Ldk => "LDK",
    Sldk => "SLDK",
});

categorical!(UseDistrict, "use_district", {
    OneExcLow => "1 Exc Low",
    TwoExcLow => "2 Exc Low",
    OneExcMed => "1 Exc Med",
    TwoExcMed => "2 Exc Med",
    OneRes => "1 Res",
    TwoRes => "2 Res",
    QuasiRes => "Quasi-Res",
    NeighborhoodComm => "Neighborhood Comm",
    Commercial => "Commercial",
    QuasiInd => "Quasi-Ind",
    Industrial => "Industrial",
    ExcInd => "Exc Ind",
    Others => "Others",
});

/// Empirical category shares used by the synthetic generator.
const DIRECTION_SHARES: [f64; 9] = [
    0.0342, 0.0177, 0.1297, 0.1031, 0.3812, 0.0998, 0.0883, 0.0172, 0.1288,
];
const STRUCTURE_SHARES: [f64; 11] = [
    0.2232, 0.0001, 0.1840, 0.4124, 0.0414, 0.0026, 0.0002, 0.1220, 0.0127, 0.0001, 0.0012,
];
const LAYOUT_SHARES: [f64; 9] = [
    0.0924, 0.3770, 0.0015, 0.1941, 0.0011, 0.0001, 0.00003, 0.3282, 0.0056,
];
const USE_DISTRICT_SHARES: [f64; 13] = [
    0.1701, 0.0056, 0.1503, 0.0701, 0.2245, 0.0460, 0.0130, 0.0842, 0.1342, 0.0810, 0.0183,
    0.0026, 0.00001,
];

/// One rental listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRecord {
    /// Monthly rent in yen (> 0), maintenance fees included.
    pub rent_price: f64,
    /// Age of the building in months.
    pub years_built: f64,
    /// Walk time to the nearest station, in metres.
    pub walk_time: f64,
    pub n_rooms: u32,
    /// Floor-area ratio in percent.
    pub floor_area_ratio: f64,
    pub x: f64,
    pub y: f64,
    pub direction: Direction,
    pub structure: Structure,
    pub layout: Layout,
    pub use_district: UseDistrict,
}

impl PropertyRecord {
    pub fn coords(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "rent_price",
    "years_built",
    "walk_time",
    "n_rooms",
    "floor_area_ratio",
    "x_km",
    "y_km",
    "direction",
    "structure",
    "layout",
    "use_district",
];

/// Result of a CSV load: parsed rows plus the count of rows dropped for
/// missing fields.
#[derive(Debug)]
pub struct LoadReport {
    pub records: Vec<PropertyRecord>,
    pub dropped: usize,
}

pub fn load_csv(path: &Path) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    {
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        let got: Vec<&str> = headers.iter().collect();
        if got != CSV_HEADER {
            return Err(Error::Schema(format!(
                "header mismatch: expected {CSV_HEADER:?}, got {got:?}"
            )));
        }
    }

    let mut records = Vec::new();
    let mut dropped = 0usize;
    for (row_idx, row) in reader.records().enumerate() {
        let line = row_idx + 2; // header is line 1
        let row = row.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, got {}", CSV_HEADER.len(), row.len()),
            });
        }
        if row.iter().any(|f| f.trim().is_empty()) {
            dropped += 1;
            continue;
        }
        records.push(parse_row(&row, line)?);
    }
    Ok(LoadReport { records, dropped })
}

fn parse_row(row: &csv::StringRecord, line: usize) -> Result<PropertyRecord> {
    fn num(row: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
        row[i].trim().parse::<f64>().map_err(|_| Error::Parse {
            line,
            msg: format!("column {:?}: not a number: {:?}", CSV_HEADER[i], &row[i]),
        })
    }
    let rent_price = num(row, 0, line)?;
    if rent_price <= 0.0 {
        return Err(Error::Parse {
            line,
            msg: format!("rent_price must be positive, got {rent_price}"),
        });
    }
    let n_rooms = row[3].trim().parse::<u32>().map_err(|_| Error::Parse {
        line,
        msg: format!("column \"n_rooms\": not a count: {:?}", &row[3]),
    })?;
    if n_rooms == 0 {
        return Err(Error::Parse {
            line,
            msg: "n_rooms must be at least 1".into(),
        });
    }
    Ok(PropertyRecord {
        rent_price,
        years_built: num(row, 1, line)?,
        walk_time: num(row, 2, line)?,
        n_rooms,
        floor_area_ratio: num(row, 4, line)?,
        x: num(row, 5, line)?,
        y: num(row, 6, line)?,
        direction: Direction::parse(row[7].trim())?,
        structure: Structure::parse(row[8].trim())?,
        layout: Layout::parse(row[9].trim())?,
        use_district: UseDistrict::parse(row[10].trim())?,
    })
}

pub fn write_csv(records: &[PropertyRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer
        .write_record(CSV_HEADER)
        .map_err(|e| Error::Schema(e.to_string()))?;
    for r in records {
        writer
            .write_record(&[
                format!("{}", r.rent_price),
                format!("{}", r.years_built),
                format!("{}", r.walk_time),
                format!("{}", r.n_rooms),
                format!("{}", r.floor_area_ratio),
                format!("{}", r.x),
                format!("{}", r.y),
                r.direction.label().to_string(),
                r.structure.label().to_string(),
                r.layout.label().to_string(),
                r.use_district.label().to_string(),
            ])
            .map_err(|e| Error::Schema(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Encoding

/// Numeric design matrix with log-rent response and aligned coordinates.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    /// n x K, first column is the constant term.
    pub x: DMatrix<f64>,
    /// Natural log of rent, length n.
    pub y: DVector<f64>,
    pub coords: Vec<Point>,
    pub column_names: Vec<String>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// Copy without the constant column (tree and network models have no use
    /// for an intercept covariate).
    pub fn without_intercept(&self) -> (DMatrix<f64>, Vec<String>) {
        let x = self.x.columns(1, self.x.ncols() - 1).into_owned();
        let names = self.column_names[1..].to_vec();
        (x, names)
    }

    /// Row subset, preserving order of `idx`.
    pub fn subset(&self, idx: &[usize]) -> DesignMatrix {
        let x = DMatrix::from_fn(idx.len(), self.x.ncols(), |r, c| self.x[(idx[r], c)]);
        let y = DVector::from_fn(idx.len(), |r, _| self.y[idx[r]]);
        let coords = idx.iter().map(|&i| self.coords[i]).collect();
        DesignMatrix {
            x,
            y,
            coords,
            column_names: self.column_names.clone(),
        }
    }
}

/// Dummy-encode records: constant + 4 continuous columns + (levels - 1)
/// indicators per categorical, reference levels Direction North,
/// Structure W, Layout R, Use district "1 Exc Low".
pub fn encode(records: &[PropertyRecord]) -> Result<DesignMatrix> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to encode".into()));
    }
    let mut column_names = vec![
        "const".to_string(),
        "years_built".to_string(),
        "walk_time".to_string(),
        "n_rooms".to_string(),
        "floor_area_ratio".to_string(),
    ];
    for d in &Direction::ALL[1..] {
        column_names.push(format!("Direction_{}", d.label()));
    }
    for s in &Structure::ALL[1..] {
        column_names.push(format!("Structure_{}", s.label()));
    }
    for l in &Layout::ALL[1..] {
        column_names.push(format!("Layout_{}", l.label()));
    }
    for u in &UseDistrict::ALL[1..] {
        column_names.push(format!("UseDistrict_{}", u.label()));
    }
    let k = column_names.len();

    let n = records.len();
    let mut x = DMatrix::zeros(n, k);
    let mut y = DVector::zeros(n);
    let mut coords = Vec::with_capacity(n);
    for (i, r) in records.iter().enumerate() {
        y[i] = r.rent_price.ln();
        coords.push(r.coords());
        x[(i, 0)] = 1.0;
        x[(i, 1)] = r.years_built;
        x[(i, 2)] = r.walk_time;
        x[(i, 3)] = r.n_rooms as f64;
        x[(i, 4)] = r.floor_area_ratio;
        let mut offset = 5;
        for (idx, levels) in [
            (r.direction.index(), Direction::ALL.len()),
            (r.structure.index(), Structure::ALL.len()),
            (r.layout.index(), Layout::ALL.len()),
            (r.use_district.index(), UseDistrict::ALL.len()),
        ] {
            if idx > 0 {
                x[(i, offset + idx - 1)] = 1.0;
            }
            offset += levels - 1;
        }
    }
    Ok(DesignMatrix {
        x,
        y,
        coords,
        column_names,
    })
}

// ---------------------------------------------------------------------------
// Synthetic generation

/// Configuration of the synthetic data generator. The defaults target the
/// marginal medians and category shares of the nationwide rental corpus the
/// models are benchmarked against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    /// Partial sill of the latent spatial field on the log-rent scale.
    pub sigma2: f64,
    /// Inverse range (1/km) of the exponential correlation.
    pub phi: f64,
    /// Nugget variance on the log-rent scale.
    pub tau2: f64,
    /// Target median rent in yen; the intercept is calibrated so the
    /// empirical median matches exactly.
    pub rent_median: f64,
    /// Strength of additional nonlinear covariate effects (0 = purely linear
    /// mean function).
    pub nonlinear: f64,
}

impl SynthConfig {
    pub fn new(n: usize) -> Self {
        SynthConfig {
            n,
            sigma2: 0.1,
            phi: 0.5,
            tau2: 0.02,
            rent_median: 63_000.0,
            nonlinear: 0.0,
        }
    }
}

/// Table-4-magnitude coefficients for the synthetic mean function. These are
/// generator inputs only, not ground truth for any real market.
mod coef {
    pub const YEARS_BUILT: f64 = -1.15e-3;
    pub const WALK_TIME: f64 = -4.88e-5;
    pub const N_ROOMS: f64 = 1.49e-1;
    pub const FLOOR_AREA_RATIO: f64 = 1.30e-3;
    pub const DIRECTION: [f64; 9] = [
        0.0, 8.09e-2, -4.45e-3, 5.40e-3, -2.33e-2, 2.46e-3, 1.94e-3, 7.39e-2, -6.85e-2,
    ];
    pub const STRUCTURE: [f64; 11] = [
        0.0, 1.88e-1, 9.41e-2, 2.40e-1, 3.67e-1, 2.14e-1, 9.13e-2, 5.34e-2, 9.17e-2, 1.20e-1,
        1.61e-1,
    ];
    pub const LAYOUT: [f64; 9] = [
        0.0, 4.22e-2, 1.10e-1, 1.37e-1, 3.65e-1, 2.79e-1, 3.04e-1, 2.76e-1, 6.06e-1,
    ];
    pub const USE_DISTRICT: [f64; 13] = [
        0.0, -1.15e-1, -1.52e-1, -2.77e-1, -2.36e-1, -2.48e-1, -2.92e-1, -2.63e-1, -4.63e-1,
        -1.91e-1, -2.46e-1, -3.17e-1, 5.00e-1,
    ];
}

fn sample_category(shares: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = shares.iter().sum();
    let target = rng.gen_range(0.0..total);
    let mut acc = 0.0;
    for (i, &s) in shares.iter().enumerate() {
        acc += s;
        if acc >= target {
            return i;
        }
    }
    shares.len() - 1
}

/// Per-record mean-function value (no intercept, no spatial field, no noise).
fn covariate_effect(r: &PropertyRecord, nonlinear: f64) -> f64 {
    let mut e = coef::YEARS_BUILT * r.years_built
        + coef::WALK_TIME * r.walk_time
        + coef::N_ROOMS * r.n_rooms as f64
        + coef::FLOOR_AREA_RATIO * r.floor_area_ratio
        + coef::DIRECTION[r.direction.index()]
        + coef::STRUCTURE[r.structure.index()]
        + coef::LAYOUT[r.layout.index()]
        + coef::USE_DISTRICT[r.use_district.index()];
    if nonlinear != 0.0 {
        // interactions and curvature on normalized continuous fields, so tree
        // models have structure that a linear mean cannot capture
        let yb = r.years_built / 228.0;
        let wt = r.walk_time / 640.0;
        let far = r.floor_area_ratio / 200.0;
        let rooms = r.n_rooms as f64;
        e += nonlinear
            * ((yb * wt).min(3.0) - 0.5 * (far - 1.0).powi(2) + 0.3 * (rooms * far).min(4.0)
                - 0.4 * (yb - 1.0).abs());
    }
    e
}

/// Deterministic synthetic dataset: covariates with the target marginals,
/// a GP-correlated spatial component on log rent, and a Gaussian nugget.
pub fn synthesize(config: &SynthConfig, seed: u64) -> Result<Vec<PropertyRecord>> {
    let n = config.n;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if config.sigma2 < 0.0 || config.tau2 < 0.0 || config.phi <= 0.0 {
        return Err(Error::InvalidInput(
            "sigma2/tau2 must be nonnegative and phi positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // zip-centroid locations with +-0.2 km jitter per record
    let n_zip = (n / 10).max(1);
    let centroids: Vec<Point> = (0..n_zip)
        .map(|_| {
            Point::new(
                rng.gen_range(332.0..372.0),
                rng.gen_range(3911.0..3951.0),
            )
        })
        .collect();

    let years_dist = LogNormal::new(228.0f64.ln(), 0.5).unwrap();
    let walk_dist = LogNormal::new(640.0f64.ln(), 0.7).unwrap();
    let far_dist = LogNormal::new(200.0f64.ln(), 0.45).unwrap();
    let rooms_dist = Poisson::new(0.48).unwrap();

    let mut records: Vec<PropertyRecord> = Vec::with_capacity(n);
    for _ in 0..n {
        let c = centroids[rng.gen_range(0..n_zip)];
        let x = c.x + rng.gen_range(-0.2..0.2);
        let y = c.y + rng.gen_range(-0.2..0.2);
        records.push(PropertyRecord {
            rent_price: 1.0, // filled below
            years_built: years_dist.sample(&mut rng).clamp(5.0, 1812.0).round(),
            walk_time: walk_dist.sample(&mut rng).clamp(1.0, 88_000.0).round(),
            n_rooms: 1 + rooms_dist.sample(&mut rng) as u32,
            floor_area_ratio: far_dist.sample(&mut rng).clamp(50.0, 1000.0).round(),
            x,
            y,
            direction: Direction::ALL[sample_category(&DIRECTION_SHARES, &mut rng)],
            structure: Structure::ALL[sample_category(&STRUCTURE_SHARES, &mut rng)],
            layout: Layout::ALL[sample_category(&LAYOUT_SHARES, &mut rng)],
            use_district: UseDistrict::ALL[sample_category(&USE_DISTRICT_SHARES, &mut rng)],
        });
    }

    let coords: Vec<Point> = records.iter().map(|r| r.coords()).collect();
    let field = if config.sigma2 > 0.0 {
        crate::gp::simulate_gp_field(&coords, config.sigma2, config.phi, &mut rng)?
    } else {
        vec![0.0; n]
    };

    let noise = Normal::new(0.0, config.tau2.sqrt()).unwrap();
    let mut raw: Vec<f64> = Vec::with_capacity(n);
    for (i, r) in records.iter().enumerate() {
        let eps = if config.tau2 > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        raw.push(covariate_effect(r, config.nonlinear) + field[i] + eps);
    }

    // calibrate the intercept so the empirical rent median hits the target
    let mut sorted = raw.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[n / 2];
    let intercept = config.rent_median.ln() - median;
    for (r, v) in records.iter_mut().zip(&raw) {
        r.rent_price = (v + intercept).exp();
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Splitting

/// Disjoint train/test index partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded uniform permutation split; train size = round(ratio * n).
pub fn split(n: usize, ratio: f64, seed: u64) -> Result<SplitIndices> {
    if n < 2 {
        return Err(Error::InvalidInput("split needs n >= 2".into()));
    }
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(Error::InvalidInput(format!(
            "ratio must be in (0, 1), got {ratio}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let train_size = (ratio * n as f64).round() as usize;
    let (train, test) = idx.split_at(train_size);
    let mut train = train.to_vec();
    let mut test = test.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}
