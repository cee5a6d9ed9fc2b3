//! Benchmark harness: runs engines over model families and writes CSV rows
//! `model,param,engine,reachable,discovered,stored,time_ms,status`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dart::reach_darts;
use crate::model::{LocationId, NatInf, ValidatedModel};
use crate::modelgen::{gen_fischer, gen_lcm};
use crate::naive::reach_naive;
use crate::search::{LimitKind, ReachResult, ResourceLimit, SearchOptions};

pub const CSV_HEADER: &str = "model,param,engine,reachable,discovered,stored,time_ms,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Naive,
    Darts,
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::Naive, Engine::Darts];

    pub fn run(
        self,
        model: &ValidatedModel,
        goal: LocationId,
        options: SearchOptions,
    ) -> Result<ReachResult, ResourceLimit> {
        match self {
            Engine::Naive => reach_naive(model, goal, options),
            Engine::Darts => reach_darts(model, goal, options),
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Engine::Naive),
            "darts" => Ok(Engine::Darts),
            other => Err(format!("unknown engine `{other}` (expected naive|darts)")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Naive => "naive",
            Engine::Darts => "darts",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "timeout")]
    Timeout,
    #[serde(rename = "oom-cap")]
    OomCap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub model: String,
    pub param: u32,
    pub engine: Engine,
    pub reachable: bool,
    pub discovered: u64,
    pub stored: u64,
    pub time_ms: u64,
    pub status: Status,
}

/// One model of a suite together with the location searched for.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub model_name: String,
    pub param: u32,
    pub model: ValidatedModel,
    pub goal: LocationId,
}

/// `gen_fischer(k)` for every `k`, searching for `violation` (a full search).
pub fn fischer_suite(params: &[u32]) -> Vec<BenchInstance> {
    params
        .iter()
        .map(|&k| {
            let model = gen_fischer(k).validate().expect("generated model is valid");
            let goal = model
                .location_id("violation")
                .expect("fischer has a violation location");
            BenchInstance {
                model_name: "fischer".into(),
                param: k,
                model,
                goal,
            }
        })
        .collect()
}

/// `gen_lcm(n, ∞)` for every `n`, searching for `Goal`.
pub fn lcm_suite(params: &[u32]) -> Vec<BenchInstance> {
    params
        .iter()
        .map(|&n| {
            let model = gen_lcm(n, NatInf::Infinite)
                .validate()
                .expect("generated model is valid");
            let goal = model.location_id("Goal").expect("lcm has a Goal location");
            BenchInstance {
                model_name: "lcm".into(),
                param: n,
                model,
                goal,
            }
        })
        .collect()
}

/// Runs one engine on one instance. Timing covers the engine run only.
pub fn run_cell(instance: &BenchInstance, engine: Engine, options: SearchOptions) -> BenchRow {
    let (result, status) = match engine.run(&instance.model, instance.goal, options) {
        Ok(r) => (r, Status::Ok),
        Err(limit) => {
            let status = match limit.kind {
                LimitKind::WallTime => Status::Timeout,
                LimitKind::StoredStates => Status::OomCap,
            };
            (limit.partial, status)
        }
    };
    BenchRow {
        model: instance.model_name.clone(),
        param: instance.param,
        engine,
        reachable: result.reachable,
        discovered: result.discovered,
        stored: result.stored,
        time_ms: u64::try_from(result.elapsed.as_millis()).unwrap_or(u64::MAX),
        status,
    }
}

/// Runs every `(instance, engine)` cell and writes one CSV row per cell, in
/// run order (instances outer, engines inner).
///
/// Sequential runs flush each row as soon as it is measured. With `parallel`
/// the cells are spread over the rayon pool, one cell per worker at a time,
/// and the rows are written afterwards by this thread.
pub fn run_bench<W: Write>(
    instances: &[BenchInstance],
    engines: &[Engine],
    options: SearchOptions,
    parallel: bool,
    out: W,
) -> csv::Result<Vec<BenchRow>> {
    let cells: Vec<(&BenchInstance, Engine)> = instances
        .iter()
        .flat_map(|i| engines.iter().map(move |&e| (i, e)))
        .collect();
    let mut writer = csv::Writer::from_writer(out);
    if cells.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    let mut rows = Vec::with_capacity(cells.len());
    if parallel {
        rows = cells
            .par_iter()
            .map(|&(i, e)| run_cell(i, e, options))
            .collect();
        for row in &rows {
            writer.serialize(row)?;
        }
    } else {
        for (i, e) in cells {
            let row = run_cell(i, e, options);
            writer.serialize(&row)?;
            writer.flush()?;
            rows.push(row);
        }
    }
    writer.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::Limits;
    use std::time::Duration;

    #[test]
    fn header_matches_row_fields() {
        let mut out = Vec::new();
        run_bench(
            &lcm_suite(&[1]),
            &[Engine::Darts],
            SearchOptions::default(),
            false,
            &mut out,
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("lcm,1,darts,true,"));
        assert!(lines.next().is_none());
    }

    #[test]
    fn empty_bench_still_has_header() {
        let mut out = Vec::new();
        run_bench(&[], &Engine::ALL, SearchOptions::default(), false, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().trim_end(), CSV_HEADER);
    }

    #[test]
    fn zero_timeout_marks_every_row() {
        let options = SearchOptions {
            limits: Limits {
                max_stored: usize::MAX,
                timeout: Duration::ZERO,
            },
            ..Default::default()
        };
        let rows = run_bench(
            &fischer_suite(&[3, 4]),
            &Engine::ALL,
            options,
            false,
            std::io::sink(),
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.status == Status::Timeout));
    }

    #[test]
    fn stored_cap_reports_oom_cap() {
        let options = SearchOptions {
            limits: Limits {
                max_stored: 5,
                timeout: Duration::MAX,
            },
            ..Default::default()
        };
        let rows = run_bench(
            &fischer_suite(&[3]),
            &Engine::ALL,
            options,
            false,
            std::io::sink(),
        )
        .unwrap();
        assert!(rows
            .iter()
            .all(|r| r.status == Status::OomCap && r.stored > 5));
    }

    #[test]
    fn parallel_rows_match_sequential_order() {
        let suite = fischer_suite(&[2, 3, 4]);
        let seq = run_bench(
            &suite,
            &Engine::ALL,
            SearchOptions::default(),
            false,
            std::io::sink(),
        )
        .unwrap();
        let par = run_bench(
            &suite,
            &Engine::ALL,
            SearchOptions::default(),
            true,
            std::io::sink(),
        )
        .unwrap();
        let key = |r: &BenchRow| (r.param, r.engine, r.reachable, r.discovered, r.stored);
        assert_eq!(
            seq.iter().map(key).collect::<Vec<_>>(),
            par.iter().map(key).collect::<Vec<_>>()
        );
    }
}
