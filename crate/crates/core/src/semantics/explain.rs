use serde::Serialize;

use super::{operator_holds, outcome_table, EvalError, Evaluator};
use crate::formula::{Formula, StrategicOp};
use crate::model::{Coalition, GameModel, JointAction};

/// Witness or counter joint actions for one strategic operator at one state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub state: String,
    pub operator: String,
    pub holds: bool,
    pub lines: Vec<String>,
}

fn outermost(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Strategic { .. } => Some(f),
        Formula::Not(g) => outermost(g),
        Formula::And(l, r) => outermost(l).or_else(|| outermost(r)),
        Formula::Atom(_) | Formula::Top => None,
    }
}

pub(super) fn explain(
    ev: &mut Evaluator<'_>,
    state: usize,
    f: &Formula,
) -> Result<Option<Explanation>, EvalError> {
    if state >= ev.model().state_count() {
        return Err(EvalError::UnknownState(format!("#{state}")));
    }
    let Some(Formula::Strategic { op, a, b, phi, psi }) = outermost(f) else {
        return Ok(None);
    };
    let model = ev.model();
    let ca = ev.resolve(a)?;
    let cb = ev.resolve(b)?;
    let phi_set = ev.extension(phi)?;
    let psi_set = ev.extension(psi)?;
    let table = outcome_table(model, state, ca, cb);
    let holds = operator_holds(*op, &table, &phi_set, &psi_set);
    let sa = joint_actions(model, ca, state);
    let sb = joint_actions(model, cb, state);
    let out = |set: &crate::model::StateSet| model.format_set(set);
    let forces_phi = |i: usize| table.by_a[i].is_subset(&phi_set);
    let forces_psi = |i: usize, j: usize| table.by_ab[i][j].is_subset(&psi_set);
    let mut lines = Vec::new();
    match (op, holds) {
        (StrategicOp::Cooperation, true) => {
            let i = (0..sa.len())
                .find(|&i| forces_phi(i) && (0..sb.len()).any(|j| forces_psi(i, j)))
                .expect("operator holds");
            let j = (0..sb.len()).find(|&j| forces_psi(i, j)).expect("operator holds");
            lines.push(format!("A plays {}: Out = {} within [phi]", sa[i], out(&table.by_a[i])));
            lines.push(format!("B adds {}: Out = {} within [psi]", sb[j], out(&table.by_ab[i][j])));
        }
        (StrategicOp::Cooperation, false) => {
            for (i, sigma) in sa.iter().enumerate() {
                if forces_phi(i) {
                    lines.push(format!("A plays {sigma}: no B joint action forces psi"));
                } else {
                    lines.push(format!("A plays {sigma}: Out = {} leaves [phi]", out(&table.by_a[i])));
                }
            }
        }
        (StrategicOp::Proactive, true) => {
            let j = (0..sb.len())
                .find(|&j| (0..sa.len()).all(|i| !forces_phi(i) || forces_psi(i, j)))
                .expect("operator holds");
            lines.push(format!("B fixes {}", sb[j]));
            for i in (0..sa.len()).filter(|&i| forces_phi(i)) {
                lines.push(format!("  against A {}: Out = {} within [psi]", sa[i], out(&table.by_ab[i][j])));
            }
        }
        (StrategicOp::Proactive, false) => {
            for (j, sigma) in sb.iter().enumerate() {
                let i = (0..sa.len())
                    .find(|&i| forces_phi(i) && !forces_psi(i, j))
                    .expect("operator fails");
                lines.push(format!(
                    "B plays {}: A answers {} forcing phi, Out = {} leaves [psi]",
                    sigma,
                    sa[i],
                    out(&table.by_ab[i][j])
                ));
            }
        }
        (StrategicOp::Reactive, true) => {
            let qualifying: Vec<usize> = (0..sa.len()).filter(|&i| forces_phi(i)).collect();
            if qualifying.is_empty() {
                lines.push("no A joint action forces phi (vacuously true)".to_string());
            }
            for i in qualifying {
                let j = (0..sb.len()).find(|&j| forces_psi(i, j)).expect("operator holds");
                lines.push(format!("A plays {}: B responds {}, Out = {}", sa[i], sb[j], out(&table.by_ab[i][j])));
            }
        }
        (StrategicOp::Reactive, false) => {
            let i = (0..sa.len())
                .find(|&i| forces_phi(i) && !(0..sb.len()).any(|j| forces_psi(i, j)))
                .expect("operator fails");
            lines.push(format!(
                "A plays {}: Out = {} within [phi], but no B response forces psi",
                sa[i],
                out(&table.by_a[i])
            ));
        }
    }
    Ok(Some(Explanation {
        state: model.state_name(state).to_string(),
        operator: outermost(f).expect("checked above").render(),
        holds,
        lines,
    }))
}

fn joint_actions(model: &GameModel, c: Coalition, state: usize) -> Vec<String> {
    model
        .joint_actions(c, state)
        .expect("state checked")
        .iter()
        .map(|ja: &JointAction| ja.describe(model))
        .collect()
}
