//! Regenerates the bundled snapshot files in `crates/cli/data`.
//!
//! The snapshots are synthetic: daily counts follow logistic incidence curves
//! with negative-binomial reporting noise, and the CFR table is drawn from a
//! fixed rule on seven of the ten covariates plus Gaussian noise. Both are
//! fully determined by the seeds below.
//!
//!     cargo run -p epiforecast-cli --example gen_fixtures

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal, Poisson};

/// Negative-binomial dispersion for daily reporting noise.
const DISPERSION: f64 = 10.0;
const END: (i32, u32, u32) = (2020, 4, 4);

struct Wave {
    size: f64,
    rate: f64,
    midpoint: f64,
}

struct Country {
    name: &'static str,
    start: (i32, u32, u32),
    waves: &'static [Wave],
}

const COUNTRIES: [Country; 5] = [
    Country { name: "india", start: (2020, 2, 1), waves: &[Wave { size: 20_000.0, rate: 0.2, midpoint: 73.0 }] },
    Country { name: "uk", start: (2020, 1, 31), waves: &[Wave { size: 120_000.0, rate: 0.22, midpoint: 70.0 }] },
    Country { name: "canada", start: (2020, 1, 26), waves: &[Wave { size: 40_000.0, rate: 0.2, midpoint: 75.0 }] },
    Country { name: "france", start: (2020, 1, 25), waves: &[Wave { size: 150_000.0, rate: 0.2, midpoint: 70.0 }] },
    Country {
        name: "south_korea",
        start: (2020, 1, 20),
        waves: &[Wave { size: 8_500.0, rate: 0.3, midpoint: 42.0 }, Wave { size: 1_800.0, rate: 0.1, midpoint: 70.0 }],
    },
];

fn incidence(waves: &[Wave], t: f64) -> f64 {
    waves
        .iter()
        .map(|w| {
            let s = 1.0 / (1.0 + (-w.rate * (t - w.midpoint)).exp());
            w.size * w.rate * s * (1.0 - s)
        })
        .sum()
}

fn draw_count(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let lambda = Gamma::new(DISPERSION, mean / DISPERSION).unwrap().sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).unwrap().sample(rng) as u64
}

fn country_csv(c: &Country, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(c.start.0, c.start.1, c.start.2).unwrap();
    let end = NaiveDate::from_ymd_opt(END.0, END.1, END.2).unwrap();
    let n = (end - start).num_days() + 1;
    let mut out = String::from("date,cases\n");
    for t in 0..n {
        let count = draw_count(&mut rng, incidence(c.waves, t as f64));
        writeln!(out, "{},{}", start + Duration::days(t), count).unwrap();
    }
    out
}

fn cfr_rule(x: &[f64; 10]) -> f64 {
    let (cases, pop, old, lockdown, period, doctors, beds) = (x[0], x[1], x[3], x[4], x[5], x[6], x[7]);
    if cases >= 14.0 {
        if (14.0..75.0).contains(&pop) {
            0.10
        } else if old >= 15.0 {
            0.065
        } else {
            0.035
        }
    } else if period >= 50.0 {
        if doctors < 2.0 {
            0.05
        } else {
            0.025
        }
    } else if lockdown < 15.0 {
        if beds < 3.0 {
            0.04
        } else {
            0.02
        }
    } else {
        0.01
    }
}

fn round_to(v: f64, places: i32) -> f64 {
    let m = 10f64.powi(places);
    (v * m).round() / m
}

fn cfr_csv(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: LogNormal<f64> = LogNormal::new(1.6, 1.5).unwrap();
    let pop: LogNormal<f64> = LogNormal::new(3.2, 1.6).unwrap();
    let noise = Normal::new(0.0, 0.0055).unwrap();
    let mut out = String::from("country,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,y\n");
    for i in 0..50 {
        let x = [
            round_to(cases.sample(&mut rng).clamp(0.25, 278.0), 2),
            round_to(pop.sample(&mut rng).clamp(0.03, 1402.0), 2),
            round_to(rng.random_range(3.0..568.0), 0),
            round_to(rng.random_range(3.2..27.0), 1),
            round_to(rng.random_range(0.0..40.0), 0),
            round_to(rng.random_range(25.0..84.0), 0),
            round_to(rng.random_range(0.2..6.36), 2),
            round_to(rng.random_range(0.1..13.7), 1),
            rng.random_range(0..2) as f64,
            rng.random_range(-1..2) as f64,
        ];
        let y = round_to((cfr_rule(&x) + noise.sample(&mut rng)).clamp(0.005, 0.127), 4);
        let fields: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        writeln!(out, "country_{:02},{},{}", i + 1, fields.join(","), y).unwrap();
    }
    out
}

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    for (i, c) in COUNTRIES.iter().enumerate() {
        std::fs::write(dir.join(format!("{}.csv", c.name)), country_csv(c, 2020 + i as u64))?;
    }
    std::fs::write(dir.join("cfr.csv"), cfr_csv(404))?;
    Ok(())
}
