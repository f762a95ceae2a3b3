use std::fmt;

use super::{AnalysisError, TradeOffCurve};

/// Result of looking up a curve under objective bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Lookup {
    pub theta: f64,
    pub outcomes: Vec<f64>,
    /// `theta` came from bisection rather than the grid.
    pub refined: bool,
    /// Bisection met a feasible but worse midpoint and fell back.
    pub non_monotone: bool,
}

impl Lookup {
    /// The compared (last) outcome.
    pub fn compared(&self) -> f64 {
        *self.outcomes.last().expect("outcome vectors have m >= 2 entries")
    }
}

const REL_TOL: f64 = 0.01;
const BRACKET_FRACTION: f64 = 1e-3;
const MAX_BISECTIONS: usize = 40;

fn check_arity(curve: &TradeOffCurve, bounds: &[f64]) -> Result<(), AnalysisError> {
    let expected = curve.arity().saturating_sub(1);
    if bounds.len() != expected || expected == 0 {
        return Err(AnalysisError::ObjectiveArity { expected, found: bounds.len() });
    }
    Ok(())
}

fn feasible(values: &[f64], bounds: &[f64]) -> bool {
    values.iter().zip(bounds).all(|(v, b)| v <= b)
}

fn compared(values: &[f64]) -> f64 {
    values[values.len() - 1]
}

/// Largest relative gap between an outcome and its bound.
fn slack(values: &[f64], bounds: &[f64]) -> f64 {
    values
        .iter()
        .zip(bounds)
        .map(|(v, b)| if *b == 0.0 { (b - v).abs() } else { ((b - v) / b).abs() })
        .fold(0.0, f64::max)
}

/// Picks the grid point minimizing the last outcome among those meeting
/// every bound on the first `m - 1` outcomes. Ties keep the smaller `theta`.
fn grid_lookup(curve: &TradeOffCurve, bounds: &[f64]) -> Result<(usize, Lookup), AnalysisError> {
    check_arity(curve, bounds)?;
    let mut best: Option<(usize, &[f64])> = None;
    for (i, p) in curve.points.iter().enumerate() {
        let Some(v) = p.values() else { continue };
        if !feasible(v, bounds) {
            continue;
        }
        if best.is_none_or(|(_, b)| compared(v) < compared(b)) {
            best = Some((i, v));
        }
    }
    match best {
        Some((i, v)) => Ok((
            i,
            Lookup {
                theta: curve.points[i].theta,
                outcomes: v.to_vec(),
                refined: false,
                non_monotone: false,
            },
        )),
        None => {
            let best = curve
                .ok_points()
                .map(|(_, v)| v[0])
                .fold(f64::INFINITY, f64::min);
            if best.is_infinite() {
                return Err(AnalysisError::EmptyCurve);
            }
            Err(AnalysisError::Infeasible {
                label: curve.labels[0].clone(),
                best,
                target: bounds[0],
            })
        }
    }
}

/// Grid lookup, optionally refined by bisection between the chosen grid
/// point and an adjacent infeasible one using `eval` to re-simulate.
///
/// Every returned point meets the bounds: a midpoint is only accepted after
/// its own evaluation is feasible.
pub fn objective_lookup<F>(
    curve: &TradeOffCurve,
    bounds: &[f64],
    eval: Option<F>,
) -> Result<Lookup, AnalysisError>
where
    F: Fn(f64) -> Result<Vec<f64>, AnalysisError>,
{
    let (idx, grid) = grid_lookup(curve, bounds)?;
    let Some(eval) = eval else { return Ok(grid) };
    if slack(&grid.outcomes, bounds) <= REL_TOL {
        return Ok(grid);
    }

    let neighbor = [idx.checked_sub(1), Some(idx + 1)]
        .into_iter()
        .flatten()
        .filter_map(|j| curve.points.get(j))
        .find(|p| p.values().is_some_and(|v| !feasible(v, bounds)));
    let Some(neighbor) = neighbor else { return Ok(grid) };

    let mut best = grid;
    let mut good = best.theta;
    let mut bad = neighbor.theta;
    let min_width = (bad - good).abs() * BRACKET_FRACTION;
    for _ in 0..MAX_BISECTIONS {
        if (bad - good).abs() <= min_width || slack(&best.outcomes, bounds) <= REL_TOL {
            break;
        }
        let mid = 0.5 * (good + bad);
        let values = eval(mid)?;
        if !feasible(&values, bounds) {
            bad = mid;
        } else if compared(&values) <= best.compared() {
            good = mid;
            best = Lookup { theta: mid, outcomes: values, refined: true, non_monotone: false };
        } else {
            best.non_monotone = true;
            break;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncomparableReason {
    /// No bound is feasible for both curves.
    NoCommonTargets,
    /// Equal compared outcomes at some common target, no strict order.
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ADominates,
    BDominates,
    Crossing,
    Incomparable(IncomparableReason),
}

impl Verdict {
    pub fn swap(self) -> Self {
        match self {
            Verdict::ADominates => Verdict::BDominates,
            Verdict::BDominates => Verdict::ADominates,
            v => v,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ADominates => "a_dominates",
            Verdict::BDominates => "b_dominates",
            Verdict::Crossing => "crossing",
            Verdict::Incomparable(IncomparableReason::NoCommonTargets) => "incomparable",
            Verdict::Incomparable(IncomparableReason::Tie) => "incomparable-by-tie",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub bounds: Vec<f64>,
    pub a: Result<Lookup, String>,
    pub b: Result<Lookup, String>,
}

impl ComparisonRow {
    /// `Some(ordering of a against b)` when both sides are feasible.
    pub fn order(&self) -> Option<std::cmp::Ordering> {
        let (a, b) = (self.a.as_ref().ok()?, self.b.as_ref().ok()?);
        a.compared().partial_cmp(&b.compared())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub a_id: String,
    pub b_id: String,
    pub rows: Vec<ComparisonRow>,
    pub verdict: Verdict,
}

/// Compares two curves on a grid of objective bounds using grid lookups.
pub fn dominance<T: AsRef<[f64]>>(
    a: &TradeOffCurve,
    b: &TradeOffCurve,
    objectives: &[T],
) -> ComparisonReport {
    use std::cmp::Ordering;

    let rows: Vec<ComparisonRow> = objectives
        .iter()
        .map(|bounds| {
            let bounds = bounds.as_ref();
            let side = |c| grid_lookup(c, bounds).map(|(_, l)| l).map_err(|e| e.to_string());
            ComparisonRow { bounds: bounds.to_vec(), a: side(a), b: side(b) }
        })
        .collect();

    let orders: Vec<Ordering> = rows.iter().filter_map(ComparisonRow::order).collect();
    let a_better = orders.contains(&Ordering::Less);
    let b_better = orders.contains(&Ordering::Greater);
    let verdict = if orders.is_empty() {
        Verdict::Incomparable(IncomparableReason::NoCommonTargets)
    } else if a_better && b_better {
        Verdict::Crossing
    } else if orders.iter().all(|o| *o == Ordering::Less) {
        Verdict::ADominates
    } else if orders.iter().all(|o| *o == Ordering::Greater) {
        Verdict::BDominates
    } else {
        Verdict::Incomparable(IncomparableReason::Tie)
    };

    ComparisonReport {
        a_id: a.indicator_id.clone(),
        b_id: b.indicator_id.clone(),
        rows,
        verdict,
    }
}
