//! Parsers for the compact `name:args` specs accepted on the command line.
//!
//! Copulas: `independent`, `comonotone`, `countermonotone`, `gaussian:R`,
//! `clusters:w,mx,my,sxx,sxy,syy;...`.
//! Marginals: `uniform:a,b`, `normal:mu,sd`, `exponential:rate`,
//! `lognormal:mu,sd`, `mixture:w,mu,sd;...`.

use copulascope::{Cluster, CopulaError, CopulaKind, MarginalSpec, MixtureComponent, Result};

fn spec_err(msg: impl Into<String>) -> CopulaError {
    CopulaError::Spec(msg.into())
}

fn numbers(text: &str, want: usize, what: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| spec_err(format!("{what}: '{t}' is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != want {
        return Err(spec_err(format!(
            "{what}: expected {want} numbers, got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn split_spec(text: &str) -> (&str, &str) {
    text.split_once(':').unwrap_or((text, ""))
}

pub fn copula_kind(text: &str) -> Result<CopulaKind> {
    let (name, args) = split_spec(text.trim());
    let no_args = |kind: CopulaKind| {
        if args.is_empty() {
            Ok(kind)
        } else {
            Err(spec_err(format!("copula '{name}' takes no parameters")))
        }
    };
    match name {
        "independent" => no_args(CopulaKind::Independent),
        "comonotone" => no_args(CopulaKind::Comonotone),
        "countermonotone" => no_args(CopulaKind::Countermonotone),
        "gaussian" => Ok(CopulaKind::Gaussian {
            r: numbers(args, 1, "gaussian")?[0],
        }),
        "clusters" => {
            let components = args
                .split(';')
                .map(|part| {
                    let v = numbers(part, 6, "clusters")?;
                    Ok(Cluster {
                        weight: v[0],
                        mean: [v[1], v[2]],
                        covariance: [[v[3], v[4]], [v[4], v[5]]],
                    })
                })
                .collect::<Result<_>>()?;
            Ok(CopulaKind::ClusterMixture { components })
        }
        _ => Err(spec_err(format!("unknown copula '{name}'"))),
    }
}

pub fn marginal(text: &str) -> Result<MarginalSpec> {
    let (name, args) = split_spec(text.trim());
    let spec = match name {
        "uniform" => {
            let v = numbers(args, 2, "uniform")?;
            MarginalSpec::Uniform { a: v[0], b: v[1] }
        }
        "normal" => {
            let v = numbers(args, 2, "normal")?;
            MarginalSpec::Normal { mu: v[0], sd: v[1] }
        }
        "exponential" => MarginalSpec::Exponential {
            rate: numbers(args, 1, "exponential")?[0],
        },
        "lognormal" => {
            let v = numbers(args, 2, "lognormal")?;
            MarginalSpec::LogNormal { mu: v[0], sd: v[1] }
        }
        "mixture" => {
            let components = args
                .split(';')
                .map(|part| {
                    let v = numbers(part, 3, "mixture")?;
                    Ok(MixtureComponent {
                        weight: v[0],
                        mu: v[1],
                        sd: v[2],
                    })
                })
                .collect::<Result<_>>()?;
            MarginalSpec::GaussianMixture { components }
        }
        _ => return Err(spec_err(format!("unknown marginal '{name}'"))),
    };
    spec.validate()?;
    Ok(spec)
}
