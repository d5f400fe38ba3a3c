//! Sign-change detection on sampled trajectories with bisection refinement.

use super::{Lerp, Trajectory};

/// First time at which `predicate(t, state)` changes sign along the
/// trajectory, refined by bisection on linearly interpolated states to within
/// `sample_stride / 100`. Returns `None` when the sign never changes.
///
/// A sample where the predicate is exactly zero counts as a crossing at that
/// sample time.
pub fn detect_event<S: Lerp>(
    traj: &Trajectory<S>,
    predicate: impl Fn(f64, &S) -> f64,
) -> Option<f64> {
    let times = traj.times();
    let states = traj.states();
    let tol = traj.config().sample_stride / 100.0;

    let mut prev = predicate(times[0], &states[0]);
    if prev == 0.0 {
        return Some(times[0]);
    }
    for i in 1..times.len() {
        let cur = predicate(times[i], &states[i]);
        if cur == 0.0 {
            return Some(times[i]);
        }
        if prev.signum() != cur.signum() {
            return Some(bisect(
                &predicate,
                (times[i - 1], states[i - 1]),
                (times[i], states[i]),
                prev,
                tol,
            ));
        }
        prev = cur;
    }
    None
}

fn bisect<S: Lerp>(
    predicate: &impl Fn(f64, &S) -> f64,
    (t_lo, s_lo): (f64, S),
    (t_hi, s_hi): (f64, S),
    p_lo: f64,
    tol: f64,
) -> f64 {
    let mut lo = t_lo;
    let mut hi = t_hi;
    let mut sign_lo = p_lo.signum();
    let span = t_hi - t_lo;
    // tol > 0 guaranteed by config validation; cap the loop regardless.
    for _ in 0..128 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let s = S::lerp(s_lo, s_hi, (mid - t_lo) / span);
        let p = predicate(mid, &s);
        if p == 0.0 {
            return mid;
        }
        if p.signum() == sign_lo {
            lo = mid;
            sign_lo = p.signum();
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
