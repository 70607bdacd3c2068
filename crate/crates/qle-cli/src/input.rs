//! Reading curvature jets from JSON files and built-in samples.

use std::path::Path;

use qle_core::curvature::{
    dust, parallel_family, pure_electric, validate, CurvatureJet, Depth, JetGenerator, Mode, Tensor4, M4,
};
use serde::Deserialize;

use crate::CliError;

type Nested4 = [[[[f64; 4]; 4]; 4]; 4];

/// Full jet: Weyl tensor with optional Ricci, stress-energy and derivative data.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FullInput {
    kappa: f64,
    mode: Mode,
    weyl: Nested4,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    ricci: Option<M4<f64>>,
    #[serde(default)]
    stress_energy: Option<M4<f64>>,
    #[serde(default)]
    d_weyl: Option<[Nested4; 4]>,
    #[serde(default)]
    d2_weyl: Option<[[Nested4; 4]; 4]>,
}

/// Electric and magnetic parts of a vacuum Weyl tensor.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectricMagneticInput {
    #[serde(default = "unit")]
    kappa: f64,
    electric: [[f64; 3]; 3],
    magnetic: [[f64; 3]; 3],
}

fn unit() -> f64 {
    1.0
}

fn flatten(t: &Nested4) -> Tensor4<f64> {
    Tensor4(t.iter().flatten().flatten().flatten().copied().collect())
}

fn finite(jet: &CurvatureJet<f64>) -> bool {
    let t4 = |t: &Tensor4<f64>| t.0.iter().all(|x| x.is_finite());
    let m4 = |m: &M4<f64>| m.iter().flatten().all(|x| x.is_finite());
    jet.kappa.is_finite()
        && jet.lambda.is_finite()
        && t4(&jet.weyl)
        && jet.ricci.as_ref().is_none_or(m4)
        && jet.stress_energy.as_ref().is_none_or(m4)
        && jet.d_weyl.iter().flatten().all(t4)
        && jet.d2_weyl.iter().flatten().all(t4)
}

impl FullInput {
    fn into_jet(self) -> CurvatureJet<f64> {
        let weyl = flatten(&self.weyl);
        let mut jet = match (self.mode, self.stress_energy) {
            (Mode::Matter, Some(t)) => {
                let mut jet = CurvatureJet::matter(self.kappa, weyl, t);
                if let Some(r) = self.ricci {
                    jet.ricci = Some(r);
                }
                jet
            }
            (mode, t) => {
                let mut jet = CurvatureJet::vacuum(self.kappa, weyl);
                jet.mode = mode;
                jet.ricci = self.ricci;
                jet.stress_energy = t;
                jet
            }
        };
        if let Some(l) = self.lambda {
            jet.lambda = l;
        }
        jet.d_weyl = self.d_weyl.map(|d| d.iter().map(flatten).collect());
        jet.d2_weyl = self
            .d2_weyl
            .map(|d| d.iter().flat_map(|row| row.iter().map(flatten)).collect());
        jet
    }
}

/// Parses a jet from JSON text in either accepted shape.
pub fn parse_jet(text: &str) -> Result<CurvatureJet<f64>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::Input("top level must be a JSON object".into()))?;
    let jet = if obj.contains_key("weyl") {
        serde_json::from_value::<FullInput>(value)?.into_jet()
    } else if obj.contains_key("electric") || obj.contains_key("magnetic") {
        let em: ElectricMagneticInput = serde_json::from_value(value)?;
        parallel_family(em.kappa, &em.electric, &em.magnetic)?
    } else {
        return Err(CliError::Input(
            "expected either a \"weyl\" tensor or \"electric\" and \"magnetic\" parts".into(),
        ));
    };
    if !finite(&jet) {
        return Err(CliError::Input("non-finite number in input".into()));
    }
    Ok(jet)
}

/// Names accepted after `builtin:`.
pub const BUILTINS: [&str; 5] = ["pure-electric", "zero", "dust", "random-vacuum", "random-matter"];

fn builtin(name: &str, seed: u64) -> Result<CurvatureJet<f64>, CliError> {
    let mut gen = JetGenerator::new(seed);
    let jet = match name {
        "pure-electric" => pure_electric(1.0, 1.0)?,
        "zero" => pure_electric(1.0, 0.0)?,
        "dust" => dust(1.0, 1.0),
        "random-vacuum" => gen.vacuum(1.0, Depth::Second)?,
        "random-matter" => gen.matter(1.0),
        _ => {
            return Err(CliError::Input(format!(
                "unknown built-in jet {name:?}; choose one of {}",
                BUILTINS.join(", ")
            )))
        }
    };
    Ok(jet)
}

/// Loads a jet from a file path or a `builtin:NAME` sample.
pub fn load_jet(source: &str, seed: u64) -> Result<CurvatureJet<f64>, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin(name, seed);
    }
    let text = std::fs::read_to_string(Path::new(source)).map_err(|e| CliError::Io(format!("{source}: {e}")))?;
    parse_jet(&text)
}

/// Loads and validates; a jet violating its constraints is malformed input.
pub fn load_valid_jet(source: &str, seed: u64) -> Result<CurvatureJet<f64>, CliError> {
    let jet = load_jet(source, seed)?;
    validate(&jet)?.into_result()?;
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nested(t: &Tensor4<f64>) -> serde_json::Value {
        let mut out = vec![vec![vec![vec![0.0; 4]; 4]; 4]; 4];
        for (k, v) in t.0.iter().enumerate() {
            out[k / 64][(k / 16) % 4][(k / 4) % 4][k % 4] = *v;
        }
        serde_json::to_value(out).unwrap()
    }

    #[test]
    fn full_form_round_trips() {
        let jet = JetGenerator::new(5).vacuum(1.0, Depth::Second).unwrap();
        let d: Vec<_> = jet.d_weyl.as_ref().unwrap().iter().map(nested).collect();
        let d2: Vec<Vec<_>> = jet
            .d2_weyl
            .as_ref()
            .unwrap()
            .chunks(4)
            .map(|row| row.iter().map(nested).collect())
            .collect();
        let text = serde_json::json!({
            "kappa": 1.0,
            "mode": "vacuum",
            "weyl": nested(&jet.weyl),
            "d_weyl": d,
            "d2_weyl": d2,
        })
        .to_string();
        let back = parse_jet(&text).unwrap();
        assert_eq!(back.weyl, jet.weyl);
        assert_eq!(back.d_weyl, jet.d_weyl);
        assert_eq!(back.d2_weyl, jet.d2_weyl);
        assert_eq!(back.lambda, -3.0);
    }

    #[test]
    fn electric_magnetic_form_is_completed() {
        let text = r#"{"electric": [[2,0,0],[0,-1,0],[0,0,-1]], "magnetic": [[0,0,0],[0,0,0],[0,0,0]]}"#;
        let jet = parse_jet(text).unwrap();
        assert_eq!(jet, pure_electric(1.0, 1.0).unwrap());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for text in [
            "[1, 2]",
            "{}",
            r#"{"kappa": 1, "mode": "vacuum", "weyl": [[1]]}"#,
            r#"{"electric": [[1,0,0],[0,1,0],[0,0,1]], "magnetic": [[0,0,0],[0,0,0],[0,0,0]], "extra": 1}"#,
            "not json",
        ] {
            assert!(matches!(parse_jet(text), Err(CliError::Json(_) | CliError::Input(_))), "{text}");
        }
        assert!(matches!(load_jet("builtin:nope", 0), Err(CliError::Input(_))));
    }
}
