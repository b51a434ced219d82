//! Success and efficiency metrics over execution records.
//!
//! All values are raw ratios or time/tile units; [`DatasetScore::percent`]
//! gives the ×100 view used in reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::RunRecord;
use crate::world::Time;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no records to score")]
    Empty,
    #[error("record {0} has no t_max")]
    MissingTMax(usize),
    #[error("record {0} has no d_max")]
    MissingDMax(usize),
    #[error("record {index} lists {found} agent distances for {expected} agents")]
    AgentCount {
        index: usize,
        expected: usize,
        found: usize,
    },
}

/// The per-task numbers the metrics need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub success: bool,
    pub oct: Time,
    pub t_max: Option<Time>,
    pub d_max: Option<u64>,
    pub n_agents: usize,
    pub distances: Vec<u64>,
    pub work_times: Vec<Time>,
}

impl TaskOutcome {
    pub fn from_record(record: &RunRecord, t_max: Time, d_max: u64) -> TaskOutcome {
        TaskOutcome {
            success: record.success,
            oct: record.oct,
            t_max: Some(t_max),
            d_max: Some(d_max),
            n_agents: record.per_agent.len(),
            distances: record.per_agent.iter().map(|a| a.distance).collect(),
            work_times: record.per_agent.iter().map(|a| a.work_time).collect(),
        }
    }

    /// Mean travel distance over all agents.
    pub fn md(&self) -> f64 {
        if self.distances.is_empty() {
            return 0.0;
        }
        self.distances.iter().sum::<u64>() as f64 / self.distances.len() as f64
    }

    /// Mean over agents of work time divided by the order completion time.
    pub fn au(&self) -> f64 {
        if self.work_times.is_empty() || self.oct == 0 {
            return 0.0;
        }
        let oct = self.oct as f64;
        self.work_times.iter().map(|&w| w as f64 / oct).sum::<f64>() / self.work_times.len() as f64
    }
}

fn non_empty(outcomes: &[TaskOutcome]) -> Result<(), MetricsError> {
    if outcomes.is_empty() {
        Err(MetricsError::Empty)
    } else {
        Ok(())
    }
}

fn t_max_of(o: &TaskOutcome, i: usize) -> Result<f64, MetricsError> {
    o.t_max
        .map(|t| t as f64)
        .ok_or(MetricsError::MissingTMax(i))
}

pub fn success_rate(outcomes: &[TaskOutcome]) -> Result<f64, MetricsError> {
    non_empty(outcomes)?;
    let wins = outcomes.iter().filter(|o| o.success).count();
    Ok(wins as f64 / outcomes.len() as f64)
}

/// Mean completion time with failures charged their bundle's `t_max`.
pub fn poct(outcomes: &[TaskOutcome]) -> Result<f64, MetricsError> {
    non_empty(outcomes)?;
    let mut total = 0.0;
    for (i, o) in outcomes.iter().enumerate() {
        total += if o.success {
            o.oct as f64
        } else {
            t_max_of(o, i)?
        };
    }
    Ok(total / outcomes.len() as f64)
}

/// Mean of `oct / t_max` over successes; `None` without any success.
pub fn noct(outcomes: &[TaskOutcome]) -> Result<Option<f64>, MetricsError> {
    non_empty(outcomes)?;
    let mut ratios = Vec::new();
    for (i, o) in outcomes.iter().enumerate().filter(|(_, o)| o.success) {
        ratios.push(o.oct as f64 / t_max_of(o, i)?);
    }
    Ok(mean(&ratios))
}

/// Per-record MD (`None` for failures) and the penalized mean pMD.
pub fn movement(outcomes: &[TaskOutcome]) -> Result<(Vec<Option<f64>>, f64), MetricsError> {
    non_empty(outcomes)?;
    let mut per_task = Vec::with_capacity(outcomes.len());
    let mut total = 0.0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.distances.len() != o.n_agents {
            return Err(MetricsError::AgentCount {
                index: i,
                expected: o.n_agents,
                found: o.distances.len(),
            });
        }
        if o.success {
            let md = o.md();
            per_task.push(Some(md));
            total += md;
        } else {
            per_task.push(None);
            total += o.d_max.ok_or(MetricsError::MissingDMax(i))? as f64;
        }
    }
    Ok((per_task, total / outcomes.len() as f64))
}

/// Mean AU over successful runs; `None` without any success.
pub fn agent_utilization(outcomes: &[TaskOutcome]) -> Result<Option<f64>, MetricsError> {
    non_empty(outcomes)?;
    let values: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.success)
        .map(TaskOutcome::au)
        .collect();
    Ok(mean(&values))
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetScore {
    pub sr: f64,
    pub poct: f64,
    pub noct: Option<f64>,
    pub pmd: f64,
    pub au: Option<f64>,
    pub n_total: usize,
    pub n_success: usize,
}

impl DatasetScore {
    /// Ratios scaled to percent; time and distance columns unchanged.
    pub fn percent(&self) -> DatasetScore {
        DatasetScore {
            sr: self.sr * 100.0,
            noct: self.noct.map(|v| v * 100.0),
            au: self.au.map(|v| v * 100.0),
            ..self.clone()
        }
    }
}

pub fn score(outcomes: &[TaskOutcome]) -> Result<DatasetScore, MetricsError> {
    Ok(DatasetScore {
        sr: success_rate(outcomes)?,
        poct: poct(outcomes)?,
        noct: noct(outcomes)?,
        pmd: movement(outcomes)?.1,
        au: agent_utilization(outcomes)?,
        n_total: outcomes.len(),
        n_success: outcomes.iter().filter(|o| o.success).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(success: bool, oct: Time, t_max: Time) -> TaskOutcome {
        TaskOutcome {
            success,
            oct,
            t_max: Some(t_max),
            d_max: Some(120),
            n_agents: 1,
            distances: vec![10],
            work_times: vec![oct],
        }
    }

    #[test]
    fn success_rate_cases() {
        let mut v = vec![outcome(true, 1, 9); 3];
        v.push(outcome(false, 9, 9));
        assert_eq!(success_rate(&v).unwrap(), 0.75);
        assert_eq!(success_rate(&v[3..]).unwrap(), 0.0);
        assert_eq!(success_rate(&v[..3]).unwrap(), 1.0);
        assert_eq!(success_rate(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn poct_cases() {
        assert_eq!(
            poct(&[outcome(true, 100, 400), outcome(true, 200, 400)]).unwrap(),
            150.0
        );
        assert_eq!(
            poct(&[outcome(true, 100, 400), outcome(false, 3, 400)]).unwrap(),
            250.0
        );
        assert_eq!(
            poct(&[outcome(false, 3, 400), outcome(false, 7, 400)]).unwrap(),
            400.0
        );
        let mut missing = outcome(false, 3, 400);
        missing.t_max = None;
        assert_eq!(poct(&[missing]), Err(MetricsError::MissingTMax(0)));
    }

    #[test]
    fn noct_cases() {
        assert_eq!(noct(&[outcome(true, 400, 400)]).unwrap(), Some(1.0));
        assert_eq!(
            noct(&[outcome(true, 100, 400), outcome(true, 300, 400)]).unwrap(),
            Some(0.5)
        );
        assert_eq!(noct(&[outcome(false, 100, 400)]).unwrap(), None);
    }

    #[test]
    fn movement_cases() {
        let mut two = outcome(true, 5, 9);
        two.n_agents = 2;
        two.distances = vec![10, 30];
        let (md, pmd) = movement(&[two.clone()]).unwrap();
        assert_eq!(md, vec![Some(20.0)]);
        assert_eq!(pmd, 20.0);

        let (md, pmd) = movement(&[outcome(false, 5, 9)]).unwrap();
        assert_eq!(md, vec![None]);
        assert_eq!(pmd, 120.0);

        let mut still = outcome(true, 5, 9);
        still.distances = vec![0];
        assert_eq!(movement(&[still]).unwrap().1, 0.0);

        two.distances.pop();
        assert!(matches!(
            movement(&[two]),
            Err(MetricsError::AgentCount { .. })
        ));
    }

    #[test]
    fn utilization_cases() {
        assert_eq!(
            agent_utilization(&[outcome(true, 100, 400)]).unwrap(),
            Some(1.0)
        );
        let mut pair = outcome(true, 100, 400);
        pair.n_agents = 2;
        pair.distances = vec![0, 0];
        pair.work_times = vec![50, 100];
        assert_eq!(agent_utilization(&[pair.clone()]).unwrap(), Some(0.75));
        let mut failed = outcome(false, 100, 400);
        failed.work_times = vec![0];
        assert_eq!(agent_utilization(&[pair, failed]).unwrap(), Some(0.75));
        assert_eq!(agent_utilization(&[outcome(false, 1, 2)]).unwrap(), None);
    }

    #[test]
    fn percent_view_scales_ratios_only() {
        let s = score(&[outcome(true, 100, 400), outcome(false, 1, 400)]).unwrap();
        let p = s.percent();
        assert_eq!(p.sr, 50.0);
        assert_eq!(p.noct, Some(25.0));
        assert_eq!(p.poct, s.poct);
        assert_eq!(p.pmd, s.pmd);
    }
}
