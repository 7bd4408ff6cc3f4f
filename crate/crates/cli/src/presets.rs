//! Compiled-in scenarios.

use crate::config::Scenario;
use crate::error::CliError;

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    /// The closed-form behaviour the preset reproduces, echoed in the summary.
    pub reproduces: &'static str,
    pub source: &'static str,
}

impl Preset {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Scenario::parse(self.source, &format!("preset:{}", self.name))
    }
}

pub const DEFAULT_PRESET: &str = "appendix-worked-example";

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "appendix-worked-example",
        reproduces: "two dephasing semigroups with gamma = 1/3, lambda = (pi/2, 0), equal weights, pair (I +- sigma_y)/2: \
                     I_int = e^(-t/3)|cos(pi t/4)|, I_tot = e^(-t/3), correlation bound e^(-t/3)|sin(pi t/4)|, \
                     I_int vanishes at t = 2",
        source: r#"
seed = 0

[scenario]
name = "appendix-worked-example"

[mixture]
weights = [0.5, 0.5]

[[mixture.components]]
kind = "dephasing"
gamma = 0.3333333333333333
lambda = 1.5707963267948966

[[mixture.components]]
kind = "dephasing"
gamma = 0.3333333333333333
lambda = 0.0

[ensemble]
p1 = 0.5
pair = { bloch = [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] }

[grid]
start = 0.0
end = 12.0
step = 0.001

[checks]
montecarlo_trials = 100000
montecarlo_times = [0.5, 1.0, 2.0, 3.0]
"#,
    },
    Preset {
        name: "random-unitary",
        reproduces: "random-unitary mixture (gamma = 0, lambda = (2 pi, 0), equal weights): \
                     I_tot constant, internal loss exactly balanced by the ancilla, \
                     I_int = |cos(pi t)| with one unit revival per period",
        source: r#"
seed = 0

[scenario]
name = "random-unitary"

[mixture]
weights = [0.5, 0.5]

[[mixture.components]]
kind = "dephasing"
gamma = 0.0
lambda = 6.283185307179586

[[mixture.components]]
kind = "dephasing"
gamma = 0.0
lambda = 0.0

[ensemble]
p1 = 0.5
pair = { bloch = [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] }

[grid]
start = 0.0
end = 12.0
step = 0.001
"#,
    },
    Preset {
        name: "semigroup-mixture",
        reproduces: "mixture of two Markovian dephasing semigroups (gamma = (0.1, 0.3), lambda = (2 pi, 0), \
                     equal weights): the mixture shows revivals while the dilated evolution stays monotone",
        source: r#"
seed = 0

[scenario]
name = "semigroup-mixture"

[mixture]
weights = [0.5, 0.5]

[[mixture.components]]
kind = "dephasing"
gamma = 0.1
lambda = 6.283185307179586

[[mixture.components]]
kind = "dephasing"
gamma = 0.3
lambda = 0.0

[ensemble]
p1 = 0.5
pair = { bloch = [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]] }

[grid]
start = 0.0
end = 12.0
step = 0.001

[search]
optimize_p1 = true
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
