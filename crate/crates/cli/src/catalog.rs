//! Named matrix families for the `catalog` subcommand.

use std::collections::BTreeMap;

use clap::ValueEnum;

use revembed::catalog::{
    constant_input_generator, delta_k, dihedral_generator, dihedral_generator_from_group, dihedral_markov, epsilon,
    equal_input_generator, equal_input_markov, lambda_k, m_delta, q_pair,
};
use revembed::{Matrix, StochasticMatrix, Tolerances};

use crate::error::CliError;
use crate::io::{Kind, MatrixFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `[[1-a, a], [b, 1-b]]`; params `a`, `b`.
    TwoState,
    /// Equal-input matrix or generator; params `x=x1,x2,...`, `which=markov|generator`.
    EqualInput,
    /// Constant-input generator `c (J - d 1)`; params `c`, `d` (default 3).
    ConstantInput,
    /// 3x3 matrix with spectrum `{1, -delta, -delta}`; param `delta` (number or `eps`) or `k`.
    MDelta,
    /// Cyclic generators `Q+`, `Q-`; param `lambda` or `k` (default 0), `which=plus|minus`.
    Cyclic,
    /// 4x4 dihedral example; `which=markov|generator|group`.
    Dihedral,
}

struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    fn new(family: Family, raw: &[(String, String)], allowed: &[&str]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, v) in raw {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown parameter `{k}` for {family:?}; expected one of {}",
                    allowed.join(", ")
                )));
            }
            map.insert(k.clone(), v.clone());
        }
        Ok(Params { map })
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.str(key)
            .map(|v| match v {
                "eps" => Ok(epsilon()),
                _ => v
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("parameter {key}: `{v}` is not a number"))),
            })
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64, CliError> {
        self.number(key)?.ok_or_else(|| CliError::Usage(format!("missing parameter `{key}`")))
    }

    fn index(&self, key: &str) -> Result<Option<u32>, CliError> {
        self.str(key)
            .map(|v| v.parse::<u32>().map_err(|_| CliError::Usage(format!("parameter {key}: `{v}` is not an index"))))
            .transpose()
    }

    fn choice<'a>(&'a self, key: &str, options: &[&'a str]) -> Result<&'a str, CliError> {
        match self.str(key) {
            None => Ok(options[0]),
            Some(v) if options.contains(&v) => Ok(v),
            Some(v) => Err(CliError::Usage(format!("parameter {key}: `{v}` is not one of {}", options.join(", ")))),
        }
    }
}

/// Builds the family instance; the notes record derived parameters.
pub fn materialize(family: Family, raw: &[(String, String)]) -> Result<(MatrixFile, Vec<String>), CliError> {
    let mut notes = Vec::new();
    let out = match family {
        Family::TwoState => {
            let p = Params::new(family, raw, &["a", "b"])?;
            let (a, b) = (p.required("a")?, p.required("b")?);
            let m = Matrix::from_rows(&[[1.0 - a, a], [b, 1.0 - b]])?;
            MatrixFile::new(StochasticMatrix::new(m, &Tolerances::default())?.rows(), Some(Kind::Markov))
        }
        Family::EqualInput => {
            let p = Params::new(family, raw, &["x", "which"])?;
            let x: Vec<f64> = p
                .str("x")
                .ok_or_else(|| CliError::Usage("missing parameter `x`".into()))?
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("parameter x: `{v}` is not a number"))))
                .collect::<Result<_, _>>()?;
            match p.choice("which", &["markov", "generator"])? {
                "markov" => MatrixFile::new(equal_input_markov(&x)?.rows(), Some(Kind::Markov)),
                _ => MatrixFile::new(equal_input_generator(&x)?.rows(), Some(Kind::Generator)),
            }
        }
        Family::ConstantInput => {
            let p = Params::new(family, raw, &["c", "d"])?;
            let d = p.index("d")?.unwrap_or(3) as usize;
            MatrixFile::new(constant_input_generator(p.required("c")?, d)?.rows(), Some(Kind::Generator))
        }
        Family::MDelta => {
            let p = Params::new(family, raw, &["delta", "k"])?;
            let delta = match (p.number("delta")?, p.index("k")?) {
                (Some(_), Some(_)) => return Err(CliError::Usage("give either `delta` or `k`, not both".into())),
                (Some(delta), None) => delta,
                (None, Some(k)) => delta_k(k),
                (None, None) => epsilon(),
            };
            notes.push(format!("delta = {delta}"));
            MatrixFile::new(m_delta(delta)?.rows(), Some(Kind::Markov))
        }
        Family::Cyclic => {
            let p = Params::new(family, raw, &["lambda", "k", "which"])?;
            let lambda = match (p.number("lambda")?, p.index("k")?) {
                (Some(_), Some(_)) => return Err(CliError::Usage("give either `lambda` or `k`, not both".into())),
                (Some(lambda), None) => lambda,
                (None, k) => lambda_k(k.unwrap_or(0)),
            };
            notes.push(format!("lambda = {lambda}"));
            let (plus, minus) = q_pair(lambda)?;
            match p.choice("which", &["plus", "minus"])? {
                "plus" => MatrixFile::new(plus.rows(), Some(Kind::Generator)),
                _ => MatrixFile::new(minus.rows(), Some(Kind::Generator)),
            }
        }
        Family::Dihedral => {
            let p = Params::new(family, raw, &["which"])?;
            match p.choice("which", &["markov", "generator", "group"])? {
                "markov" => MatrixFile::new(dihedral_markov().rows(), Some(Kind::Markov)),
                "generator" => MatrixFile::new(dihedral_generator().rows(), Some(Kind::Generator)),
                _ => MatrixFile::new(dihedral_generator_from_group().rows(), Some(Kind::Generator)),
            }
        }
    };
    Ok((out, notes))
}
