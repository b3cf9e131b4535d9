//! Inputs shared by the criterion benches in `benches/`.

use sel_core::estimate::MatchRecord;
use sel_core::simbench::{generate_instance, instance_dataset, SimConfig};
use sel_core::{sample_cauchy, Dataset, RngStream};

/// One Cauchy process of length `m` around location 0.
pub fn cauchy_process(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    sample_cauchy(&mut rng, m, 0.0, 1.0).expect("positive scale")
}

/// Round-robin league: every ordered pair of `teams` teams meets once a week.
pub fn league(teams: usize, seed: u64) -> Vec<MatchRecord> {
    let mut rng = RngStream::new(seed, 0);
    let start = chrono::NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date");
    let mut out = Vec::new();
    for i in 0..teams {
        for j in 0..teams {
            if i == j {
                continue;
            }
            let day = (out.len() / teams) as i64 * 7;
            out.push(
                MatchRecord::new(
                    start + chrono::Duration::days(day),
                    format!("t{i}"),
                    format!("t{j}"),
                    rng.below(5) as u32,
                    rng.below(4) as u32,
                )
                .expect("distinct teams"),
            );
        }
    }
    out
}

/// Baseline design from the simulation study with `n` rows and `p` covariates.
pub fn regression_data(n: usize, p: usize, seed: u64) -> Dataset {
    let cfg = SimConfig {
        n,
        m: 20,
        ..SimConfig::default()
    };
    let mut rng = RngStream::new(seed, 0);
    let inst = generate_instance(&cfg, p, &mut rng).expect("valid config");
    instance_dataset(&inst, None).expect("consistent columns")
}
