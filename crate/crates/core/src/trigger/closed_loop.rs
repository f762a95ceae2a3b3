use crate::model::{Day, Dynamics, StateVec, Trajectory};

use super::{controller_eval, Regime, SwitchLog, TriggerError, TriggerPolicy};

/// Result of searching for the next trigger time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerOutcome {
    /// A switch happens at this day.
    Switch(Day),
    /// No switch before the horizon; the episode ends there.
    Horizon,
}

/// Output of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopRun {
    pub trajectory: Trajectory,
    pub log: SwitchLog,
    /// Indicator value on every day `t0..=horizon+1`.
    pub indicator: Vec<f64>,
}

/// Incremental closed-loop simulation. States are known up to the last
/// trigger time and extended by [`ClosedLoop::next_trigger`].
pub struct ClosedLoop<'a, M: Dynamics + ?Sized> {
    model: &'a M,
    policy: &'a TriggerPolicy,
    t0: Day,
    horizon: Day,
    states: Vec<StateVec>,
    controls: Vec<f64>,
    observations: Vec<f64>,
    indicator: Vec<f64>,
    log: SwitchLog,
}

impl<'a, M: Dynamics + ?Sized> ClosedLoop<'a, M> {
    /// Decides `u(t0)` from the fully padded initial window.
    pub fn start(
        model: &'a M,
        policy: &'a TriggerPolicy,
        x0: StateVec,
        t0: Day,
        horizon: Day,
    ) -> Result<Self, TriggerError> {
        policy.validate()?;
        if horizon < t0 {
            return Err(TriggerError::Horizon { t0, horizon });
        }
        let mut run = ClosedLoop {
            model,
            policy,
            t0,
            horizon,
            states: Vec::with_capacity(horizon - t0 + 2),
            controls: Vec::with_capacity(horizon - t0 + 1),
            observations: Vec::with_capacity(horizon - t0 + 2),
            indicator: Vec::with_capacity(horizon - t0 + 2),
            log: SwitchLog::new(t0, Regime::Released),
        };
        run.push_state(x0)?;
        let value = run.indicator[0];
        let regime = Regime::from_membership(value <= policy.theta);
        run.log.initial_regime = regime;
        let u0 = match regime {
            Regime::Released => 0.0,
            Regime::Applied => policy.u_ref,
        };
        run.controls.push(u0);
        Ok(run)
    }

    /// Day of the latest state.
    pub fn current_day(&self) -> Day {
        self.t0 + self.states.len() - 1
    }

    pub fn log(&self) -> &SwitchLog {
        &self.log
    }

    fn push_state(&mut self, x: StateVec) -> Result<(), TriggerError> {
        let day = self.t0 + self.states.len();
        let obs = self
            .policy
            .indicator
            .observe(&x)
            .map_err(|source| TriggerError::Indicator { day, source })?;
        self.states.push(x);
        self.observations.push(obs);
        let value = self.window_value(day)?;
        self.indicator.push(value);
        Ok(())
    }

    fn window_value(&self, t: Day) -> Result<f64, TriggerError> {
        let tau = self.policy.tau();
        let window: Vec<f64> = (0..=tau)
            .map(|k| {
                let day = (t + k).saturating_sub(tau).max(self.t0);
                self.observations[day - self.t0]
            })
            .collect();
        self.policy
            .indicator
            .aggregate(&window)
            .map_err(|source| TriggerError::Indicator { day: t, source })
    }

    fn advance(&mut self) -> Result<(), TriggerError> {
        let t = self.current_day();
        let x = &self.states[t - self.t0];
        let u = self.controls[t - self.t0];
        let next = self.model.step(x, u).map_err(|e| e.at_day(t))?;
        self.push_state(next)
    }

    /// Simulates from the latest trigger time under its controller until the
    /// indicator window crosses the event set boundary (after the mandatory
    /// dwell of `Delta` days), or until the horizon.
    pub fn next_trigger(&mut self) -> Result<TriggerOutcome, TriggerError> {
        let t_k = *self.log.trigger_times.last().expect("log starts with t0");
        debug_assert_eq!(self.current_day(), t_k);
        let regime = self.log.last_regime();
        let released = regime == Regime::Released;
        let u_k = self.controls[t_k - self.t0];
        let dwell_end = t_k + self.policy.min_interevent();
        let mut target: Option<Day> = None;

        loop {
            let t = self.current_day();
            if t >= self.horizon {
                return Ok(TriggerOutcome::Horizon);
            }
            self.advance()?;
            let t = t + 1;
            let u = controller_eval(t - t_k, released, u_k, &self.policy.ramps);
            self.controls.push(u);

            if target.is_none() && t >= dwell_end {
                let in_set = self.indicator[t - self.t0] <= self.policy.theta;
                if in_set != released {
                    target = Some(dwell_end + self.policy.alignment.apply(t - dwell_end));
                }
            }
            if target == Some(t) {
                self.log.trigger_times.push(t);
                return Ok(TriggerOutcome::Switch(t));
            }
        }
    }

    /// Runs the remaining trigger loop and appends `x(horizon + 1)`.
    pub fn finish(mut self) -> Result<ClosedLoopRun, TriggerError> {
        while let TriggerOutcome::Switch(_) = self.next_trigger()? {}
        self.advance()?;
        Ok(ClosedLoopRun {
            trajectory: Trajectory::new(self.t0, self.states, self.controls),
            log: self.log,
            indicator: self.indicator,
        })
    }
}

/// Simulates the event-triggered feedback from `x0` at `t0` up to `horizon`.
pub fn simulate_closed_loop<M: Dynamics + ?Sized>(
    model: &M,
    x0: &StateVec,
    policy: &TriggerPolicy,
    t0: Day,
    horizon: Day,
) -> Result<ClosedLoopRun, TriggerError> {
    ClosedLoop::start(model, policy, x0.clone(), t0, horizon)?.finish()
}
