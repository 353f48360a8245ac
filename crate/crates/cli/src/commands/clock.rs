use clockforge::clockham::{
    dirichlet_ansatz, endpoint_penalized_clock, endpoint_penalized_energy, kitaev_clock,
    metropolis_hamiltonian, stoquastic_lower_bound_tridiagonal, theorem1_matrix,
};

use super::{distribution, require_t, Ctx};
use crate::config::{ClockCmd, ClockKind};
use crate::error::{CliError, Context};
use crate::output::{Outcome, Table};
use crate::row;

pub fn run(cmd: &ClockCmd, ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        ClockCmd::Build { kind, pi, t } => {
            require_t(&[*t])?;
            let h = match kind {
                ClockKind::Kitaev => kitaev_clock(*t).input()?,
                ClockKind::Theorem1 => theorem1_matrix(*t).input()?,
                ClockKind::Penalized => endpoint_penalized_clock(*t).input()?,
                ClockKind::Metropolis => metropolis_hamiltonian(&distribution(*pi, *t, ctx)?),
            };
            let g = h.ground_state().numerics("spectral")?;
            let mut table = Table::new(&["t", "a_t", "b_t", "psi_t", "pi_t"]);
            for s in 0..=*t {
                let psi = g.vector[s].re;
                table.push(row![
                    s,
                    h.diag()[s],
                    h.offdiag().get(s).copied(),
                    psi,
                    psi * psi
                ]);
            }
            Ok(Outcome::table(table))
        }
        ClockCmd::Metropolis { pi, t } => {
            require_t(t)?;
            let rows = ctx.map(t, |&t| {
                let p = distribution(*pi, t, ctx)?;
                let h = metropolis_hamiltonian(&p);
                let e0 = h.kth_eigenvalue(0);
                let gap = h.spectral_gap().numerics("spectral")?;
                Ok(row![t, e0, gap, gap * (t * t) as f64, p.min()])
            })?;
            let mut table = Table::new(&["T", "E0", "gap", "gap_T2", "pi_min"]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Outcome::table(table))
        }
        ClockCmd::Bound { t } => {
            require_t(t)?;
            let rows = ctx.map(t, |&t| {
                let h = endpoint_penalized_clock(t).input()?;
                let e0 = h.kth_eigenvalue(0);
                let lb = stoquastic_lower_bound_tridiagonal(&h, &dirichlet_ansatz(t))
                    .numerics("clockham")?;
                let exact = endpoint_penalized_energy(t);
                Ok(row![t, e0, exact, lb, (lb - exact).abs()])
            })?;
            let mut table = Table::new(&["T", "E0", "analytic", "ansatz_bound", "defect"]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Outcome::table(table))
        }
    }
}
