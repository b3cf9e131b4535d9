//! Team strengths from match results.
//!
//! Goals are modelled as independent Poisson counts with
//! `log λ_home = β₀ + (r_home − r_away) + h` and
//! `log λ_away = β₀ + (r_away − r_home)`, fitted by recency-weighted maximum
//! likelihood. Strengths are identified by `Σ r = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HALF_LIFE_DAYS: f64 = 500.0;

const PARAM_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub date: NaiveDate,
    pub home_team: String,
    pub away_team: String,
    pub home_goals: u32,
    pub away_goals: u32,
}

impl MatchRecord {
    pub fn new(
        date: NaiveDate,
        home_team: impl Into<String>,
        away_team: impl Into<String>,
        home_goals: u32,
        away_goals: u32,
    ) -> Result<Self> {
        let record = Self {
            date,
            home_team: home_team.into(),
            away_team: away_team.into(),
            home_goals,
            away_goals,
        };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<()> {
        if self.home_team == self.away_team {
            return Err(Error::InvalidMatch(format!(
                "{} plays itself on {}",
                self.home_team, self.date
            )));
        }
        Ok(())
    }
}

/// Reads `date,home_team,away_team,home_goals,away_goals` with ISO-8601 dates.
pub fn read_matches(path: impl AsRef<Path>) -> Result<Vec<MatchRecord>> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::InvalidMatch(e.to_string()))?;
    let mut out = Vec::new();
    for (i, record) in reader.deserialize::<MatchRecord>().enumerate() {
        let record = record.map_err(|e| Error::ParseError {
            row: i + 1,
            col: 0,
            message: e.to_string(),
        })?;
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_matches(matches: &[MatchRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidMatch(format!("{other:?}")),
    })?;
    for m in matches {
        writer
            .serialize(m)
            .map_err(|e| Error::InvalidMatch(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// `0.5^(Δdays / half_life_days)`.
pub fn recency_weight(
    match_date: NaiveDate,
    reference_date: NaiveDate,
    half_life_days: f64,
) -> Result<f64> {
    if !(half_life_days > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half-life {half_life_days} must be positive"
        )));
    }
    if match_date > reference_date {
        return Err(Error::FutureMatch {
            match_date,
            reference_date,
        });
    }
    let days = (reference_date - match_date).num_days() as f64;
    Ok(0.5f64.powf(days / half_life_days))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthTable {
    pub strengths: BTreeMap<String, f64>,
    pub intercept: f64,
    pub home_effect: f64,
    pub reference_date: NaiveDate,
    pub half_life_days: f64,
    pub iterations: usize,
}

impl StrengthTable {
    pub fn strength(&self, team: &str) -> Result<f64> {
        self.strengths
            .get(team)
            .copied()
            .ok_or_else(|| Error::UnknownTeam(team.to_string()))
    }

    /// Expected goals `(λ_home, λ_away)` for a fixture.
    pub fn expected_goals(&self, home: &str, away: &str) -> Result<(f64, f64)> {
        let diff = self.strength(home)? - self.strength(away)?;
        Ok((
            (self.intercept + diff + self.home_effect).exp(),
            (self.intercept - diff).exp(),
        ))
    }

    /// Gradient of the weighted log-likelihood in the unconstrained
    /// parametrisation `(β₀, h, r_1 … r_T)`.
    pub fn weighted_score(&self, matches: &[MatchRecord]) -> Result<Vec<f64>> {
        let teams: Vec<&String> = self.strengths.keys().collect();
        let mut score = vec![0.0; 2 + teams.len()];
        for m in matches {
            let w = recency_weight(m.date, self.reference_date, self.half_life_days)?;
            let a = teams
                .binary_search(&&m.home_team)
                .map_err(|_| Error::UnknownTeam(m.home_team.clone()))?;
            let b = teams
                .binary_search(&&m.away_team)
                .map_err(|_| Error::UnknownTeam(m.away_team.clone()))?;
            let (lh, la) = self.expected_goals(&m.home_team, &m.away_team)?;
            let rh = w * (m.home_goals as f64 - lh);
            let ra = w * (m.away_goals as f64 - la);
            score[0] += rh + ra;
            score[1] += rh;
            score[2 + a] += rh - ra;
            score[2 + b] += ra - rh;
        }
        Ok(score)
    }
}

struct Observation {
    home: usize,
    away: usize,
    is_home: bool,
    goals: f64,
    weight: f64,
}

fn check_connected(teams: &[String], matches: &[(usize, usize)]) -> Result<()> {
    let mut parent: Vec<usize> = (0..teams.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in matches {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 0);
    let cut: Vec<String> = (0..teams.len())
        .filter(|&t| find(&mut parent, t) != root)
        .map(|t| teams[t].clone())
        .collect();
    if cut.is_empty() {
        Ok(())
    } else {
        Err(Error::DisconnectedSchedule(cut))
    }
}

/// Recency-weighted Poisson strengths by iteratively reweighted least squares.
///
/// The last team's strength is eliminated through `r_T = −Σ_{k<T} r_k`, so the
/// working design has full rank whenever the schedule is connected; the
/// recovered strengths are re-centred after every iteration.
pub fn fit_strengths(
    matches: &[MatchRecord],
    reference_date: NaiveDate,
    half_life_days: f64,
) -> Result<StrengthTable> {
    let teams: Vec<String> = matches
        .iter()
        .flat_map(|m| [m.home_team.clone(), m.away_team.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if teams.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two teams".to_string(),
        ));
    }
    let index = |t: &str| teams.binary_search_by(|x| x.as_str().cmp(t)).unwrap();
    let mut observations = Vec::with_capacity(2 * matches.len());
    let mut pairs = Vec::with_capacity(matches.len());
    for m in matches {
        m.validate()?;
        let weight = recency_weight(m.date, reference_date, half_life_days)?;
        let (h, a) = (index(&m.home_team), index(&m.away_team));
        pairs.push((h, a));
        observations.push(Observation {
            home: h,
            away: a,
            is_home: true,
            goals: m.home_goals as f64,
            weight,
        });
        observations.push(Observation {
            home: a,
            away: h,
            is_home: false,
            goals: m.away_goals as f64,
            weight,
        });
    }
    check_connected(&teams, &pairs)?;

    let n_teams = teams.len();
    let dim = 2 + n_teams - 1;
    let last = n_teams - 1;
    let total_weight: f64 = observations.iter().map(|o| o.weight).sum();
    let mean_goals = observations.iter().map(|o| o.weight * o.goals).sum::<f64>() / total_weight;
    if !(mean_goals > 0.0) {
        return Err(Error::FailedConvergence { iterations: 0 });
    }

    // Reduced design row: [1, home, e_own − e_opp with e_last = −Σ e_k].
    let design = |o: &Observation, row: &mut [f64]| {
        row.fill(0.0);
        row[0] = 1.0;
        row[1] = if o.is_home { 1.0 } else { 0.0 };
        for (team, sign) in [(o.home, 1.0), (o.away, -1.0)] {
            if team == last {
                for k in 0..last {
                    row[2 + k] -= sign;
                }
            } else {
                row[2 + team] += sign;
            }
        }
    };
    let mut observation_rows = vec![0.0; observations.len() * dim];
    for (o, row) in observations
        .iter()
        .zip(observation_rows.chunks_exact_mut(dim))
    {
        design(o, row);
    }
    let linear_predictor = |theta: &DVector<f64>, row: &[f64]| -> f64 {
        row.iter().zip(theta.iter()).map(|(x, t)| x * t).sum()
    };
    let log_likelihood = |theta: &DVector<f64>| -> f64 {
        observations
            .iter()
            .zip(observation_rows.chunks_exact(dim))
            .map(|(o, row)| {
                let eta = linear_predictor(theta, row);
                o.weight * (o.goals * eta - eta.exp())
            })
            .sum()
    };

    let mut theta = DVector::zeros(dim);
    theta[0] = mean_goals.ln();
    let mut current = log_likelihood(&theta);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut xtwx = DMatrix::<f64>::zeros(dim, dim);
        let mut xtwz = DVector::<f64>::zeros(dim);
        for (o, row) in observations.iter().zip(observation_rows.chunks_exact(dim)) {
            let eta = linear_predictor(&theta, row);
            let mu = eta.exp();
            let w = o.weight * mu;
            let z = eta + (o.goals - mu) / mu;
            for i in 0..dim {
                if row[i] == 0.0 {
                    continue;
                }
                let wi = w * row[i];
                xtwz[i] += wi * z;
                for j in 0..dim {
                    xtwx[(i, j)] += wi * row[j];
                }
            }
        }
        let proposal = xtwx
            .cholesky()
            .ok_or(Error::FailedConvergence { iterations })?
            .solve(&xtwz);
        let mut step = &proposal - &theta;
        let mut next = &theta + &step;
        let mut next_ll = log_likelihood(&next);
        let mut halvings = 0;
        while !(next_ll >= current - 1e-12 * (1.0 + current.abs())) && halvings < 40 {
            step *= 0.5;
            next = &theta + &step;
            next_ll = log_likelihood(&next);
            halvings += 1;
        }
        let change = step.amax();
        theta = next;
        current = next_ll;
        if change < PARAM_TOLERANCE {
            break;
        }
        if iterations >= MAX_ITERATIONS || !change.is_finite() {
            return Err(Error::FailedConvergence { iterations });
        }
    }

    let mut strengths: Vec<f64> = (0..last).map(|k| theta[2 + k]).collect();
    strengths.push(-strengths.iter().sum::<f64>());
    let centre = strengths.iter().sum::<f64>() / n_teams as f64;
    Ok(StrengthTable {
        strengths: teams
            .into_iter()
            .zip(strengths.into_iter().map(|r| r - centre))
            .collect(),
        intercept: theta[0],
        home_effect: theta[1],
        reference_date,
        half_life_days,
        iterations,
    })
}

/// Average goals scored by `team`, home or away.
pub fn mean_goals_strength(matches: &[MatchRecord], team: &str) -> Result<f64> {
    let goals: Vec<f64> = matches
        .iter()
        .filter_map(|m| {
            if m.home_team == team {
                Some(m.home_goals as f64)
            } else if m.away_team == team {
                Some(m.away_goals as f64)
            } else {
                None
            }
        })
        .collect();
    if goals.is_empty() {
        return Err(Error::UnknownTeam(team.to_string()));
    }
    Ok(goals.iter().sum::<f64>() / goals.len() as f64)
}

/// [`mean_goals_strength`] for every team, keyed by name.
pub fn mean_goals_table(matches: &[MatchRecord]) -> Result<BTreeMap<String, f64>> {
    let teams: BTreeSet<&str> = matches
        .iter()
        .flat_map(|m| [m.home_team.as_str(), m.away_team.as_str()])
        .collect();
    teams
        .into_iter()
        .map(|t| Ok((t.to_string(), mean_goals_strength(matches, t)?)))
        .collect()
}
