use clockforge::adiabatic::{final_overlap_estimate, gap_sweep, uniform_grid, Schedule};

use super::{require_t, Ctx};
use crate::config::{AdiabaticCmd, ScheduleChoice};
use crate::error::{CliError, Context};
use crate::output::{Outcome, Table};
use crate::row;

pub fn schedule(choice: ScheduleChoice, t: usize) -> Result<Schedule, CliError> {
    match choice {
        ScheduleChoice::Standard => Schedule::clock_standard(t),
        ScheduleChoice::Weighted => Schedule::clock_weighted(t),
        ScheduleChoice::Modified => Schedule::clock_modified(t),
    }
    .input()
}

pub fn run(cmd: &AdiabaticCmd, ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        AdiabaticCmd::Sweep {
            schedule: choice,
            t,
            grid,
        } => {
            require_t(&[*t])?;
            if *grid < 2 {
                return Err(CliError::Config("--grid needs at least 2 points".into()));
            }
            let sch = schedule(*choice, *t)?;
            let curve = gap_sweep(&sch, &uniform_grid(*grid)).numerics("adiabatic")?;
            let mut table = Table::new(&["s", "E0", "E1", "gap"]);
            for p in &curve.points {
                table.push(row![p.s, p.e0, p.e1, p.gap]);
            }
            let summary = format!("min gap {} at s = {}", curve.min_gap, curve.argmin);
            let mut out = Outcome::table(table);
            out.summary = Some(summary);
            Ok(out)
        }
        AdiabaticCmd::Overlap { t } => {
            require_t(t)?;
            let rows = ctx.map(t, |&t| {
                let r = final_overlap_estimate(&schedule(ScheduleChoice::Modified, t)?)
                    .numerics("adiabatic")?;
                Ok(row![
                    t,
                    r.overlap,
                    r.deviation,
                    r.first_order_bound,
                    r.endpoint_weight
                ])
            })?;
            let mut table = Table::new(&[
                "T",
                "overlap",
                "deviation",
                "first_order_bound",
                "endpoint_weight",
            ]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Outcome::table(table))
        }
    }
}
