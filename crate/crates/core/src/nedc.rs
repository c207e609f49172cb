//! Synthetic driving-cycle recordings: the New European Driving Cycle and
//! two variants that stay within a 15 km/h input tube around it.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Symbol, Trace};
use crate::value::Value;

/// (second, km/h) corner points of the cycle; speed is linear in between.
pub const NEDC_POINTS: &[(u32, u32)] = &[
    (0, 0), (6, 0), (11, 0), (15, 15), (23, 15), (25, 10), (28, 0), (44, 0), (49, 0), (54, 15),
    (56, 15), (61, 32), (85, 32), (93, 10), (96, 0), (112, 0), (117, 0), (122, 15), (124, 15),
    (133, 35), (135, 35), (143, 50), (155, 50), (163, 35), (176, 35), (178, 35), (185, 10),
    (188, 0), (195, 0), (201, 0), (206, 0), (210, 15), (218, 15), (220, 10), (223, 0), (239, 0),
    (244, 0), (249, 15), (251, 15), (256, 32), (280, 32), (288, 10), (291, 0), (307, 0), (312, 0),
    (317, 15), (319, 15), (328, 35), (330, 35), (338, 50), (350, 50), (358, 35), (371, 35),
    (373, 35), (380, 10), (383, 0), (390, 0), (396, 0), (401, 0), (405, 15), (413, 15), (415, 10),
    (418, 0), (434, 0), (439, 0), (444, 15), (446, 15), (451, 32), (475, 32), (483, 10), (486, 0),
    (502, 0), (507, 0), (512, 15), (514, 15), (523, 35), (525, 35), (533, 50), (545, 50),
    (553, 35), (566, 35), (568, 35), (575, 10), (578, 0), (585, 0), (591, 0), (596, 0), (600, 15),
    (608, 15), (610, 10), (613, 0), (629, 0), (634, 0), (639, 15), (641, 15), (646, 32), (670, 32),
    (678, 10), (681, 0), (697, 0), (702, 0), (707, 15), (709, 15), (718, 35), (720, 35), (728, 50),
    (740, 50), (748, 35), (761, 35), (763, 35), (770, 10), (773, 0), (780, 0), (800, 0), (805, 15),
    (807, 15), (816, 35), (818, 35), (826, 50), (828, 50), (841, 70), (891, 70), (895, 60),
    (899, 50), (968, 50), (981, 70), (1031, 70), (1066, 100), (1096, 100), (1116, 120),
    (1126, 120), (1142, 80), (1150, 50), (1160, 0), (1180, 0),
];

/// Start times of the 15 → 32 km/h accelerations that the power variant
/// drives at 1.5 m/s².
pub const POWER_RAMPS: [u32; 4] = [56, 251, 446, 641];

/// The three recorded cycles and their accumulated NOx in mg/km.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Nedc,
    PowerNedc,
    SineNedc,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Nedc, Profile::PowerNedc, Profile::SineNedc];

    pub fn file_name(self) -> &'static str {
        match self {
            Profile::Nedc => "NEDC.txt",
            Profile::PowerNedc => "PowerNEDC.txt",
            Profile::SineNedc => "SineNEDC.txt",
        }
    }

    /// Measured NOx of the doped car on this cycle.
    pub fn nox(self) -> Value {
        Value::from_int(match self {
            Profile::Nedc => 180,
            Profile::PowerNedc => 204,
            Profile::SineNedc => 584,
        })
    }

    /// Speed in km/h at second `t`, before rounding.
    pub fn speed(self, t: u32) -> f64 {
        match self {
            Profile::Nedc => nedc_speed(t as f64),
            Profile::PowerNedc => match POWER_RAMPS.iter().find(|t0| (**t0..=**t0 + 5).contains(&t)) {
                Some(t0) => (15.0 + 5.4 * f64::from(t - t0)).min(32.0),
                None => nedc_speed(t as f64),
            },
            Profile::SineNedc => (nedc_speed(t as f64) + 5.0 * (0.5 * t as f64).sin()).max(0.0),
        }
    }

    /// One speed sample per second, rounded to 0.01 km/h.
    pub fn speeds(self) -> Vec<Value> {
        (0..1180)
            .map(|t| Value::from_micros((self.speed(t) * 100.0).round() as i64 * 10_000))
            .collect()
    }

    pub fn trace(self) -> Trace {
        self.speeds()
            .into_iter()
            .map(Symbol::Input)
            .chain(std::iter::once(Symbol::Output(self.nox())))
            .collect()
    }

    /// The recording in the speed/NOx file layout.
    pub fn render(self) -> String {
        let mut out: String = self.speeds().iter().map(|v| format!("{v}\n")).collect();
        out.push_str(&format!("{}\n", self.nox()));
        out
    }
}

/// Piecewise-linear cycle speed; 0 outside the cycle.
pub fn nedc_speed(t: f64) -> f64 {
    for w in NEDC_POINTS.windows(2) {
        let (t0, v0) = (f64::from(w[0].0), f64::from(w[0].1));
        let (t1, v1) = (f64::from(w[1].0), f64::from(w[1].1));
        if t >= t0 && t <= t1 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    0.0
}

/// Writes the three recordings into `dir`.
pub fn write_fixtures(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for p in Profile::ALL {
        let path = dir.join(p.file_name());
        std::fs::write(&path, p.render()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
