//! Compact one-line generator specs for `--gen`.
//!
//! Grammar: `kind,key=value,key=value,...` where a `base=(...)` value nests
//! another spec. Examples:
//!
//! ```text
//! low_rank,n=500,k=50
//! noisy_sparse,n=500,k=50,density=0.05,sigma=0.01
//! ill_conditioned,n=500,k=50
//! spectral_decay,n=100
//! perturbed,eps=1e-3,base=(low_rank,n=500,k=50)
//! paper_example,id=ex34
//! ```
//!
//! Seeds come from the command's `--seed`, not from the spec string.

use ddq::generators::GeneratorSpec;

/// Split on top-level commas, leaving parenthesized groups intact.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

pub fn parse_gen_spec(spec: &str, seed: u64) -> Result<GeneratorSpec, String> {
    let parts = split_top_level(spec.trim());
    let kind = parts
        .first()
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .ok_or_else(|| "empty generator spec".to_string())?;

    let mut n = None;
    let mut k = None;
    let mut density = None;
    let mut sigma = None;
    let mut eps = None;
    let mut base = None;
    let mut id = None;
    for part in &parts[1..] {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|e| format!("n: {e}"))?),
            "k" => k = Some(value.parse::<usize>().map_err(|e| format!("k: {e}"))?),
            "density" => {
                density = Some(value.parse::<f64>().map_err(|e| format!("density: {e}"))?)
            }
            "sigma" => sigma = Some(value.parse::<f64>().map_err(|e| format!("sigma: {e}"))?),
            "eps" => eps = Some(value.parse::<f64>().map_err(|e| format!("eps: {e}"))?),
            "base" => {
                let inner = value
                    .strip_prefix('(')
                    .and_then(|v| v.strip_suffix(')'))
                    .ok_or_else(|| format!("base must be parenthesized, got {value:?}"))?;
                base = Some(parse_gen_spec(inner, seed)?);
            }
            "id" | "example_id" => id = Some(value.to_string()),
            other => return Err(format!("unknown key {other:?}")),
        }
    }

    let need = |opt: Option<usize>, what: &str| {
        opt.ok_or_else(|| format!("{kind} requires {what}"))
    };
    match kind {
        "low_rank" => Ok(GeneratorSpec::LowRank { n: need(n, "n")?, k: need(k, "k")?, seed }),
        "noisy_sparse" => Ok(GeneratorSpec::NoisySparse {
            n: need(n, "n")?,
            k: need(k, "k")?,
            density: density.ok_or("noisy_sparse requires density")?,
            sigma_noise: sigma.ok_or("noisy_sparse requires sigma")?,
            seed,
        }),
        "ill_conditioned" => {
            Ok(GeneratorSpec::IllConditioned { n: need(n, "n")?, k: need(k, "k")?, seed })
        }
        "spectral_decay" => Ok(GeneratorSpec::SpectralDecay { n: need(n, "n")?, seed }),
        "perturbed" => Ok(GeneratorSpec::Perturbed {
            base: Box::new(base.ok_or("perturbed requires base=(...)")?),
            eps: eps.ok_or("perturbed requires eps")?,
            seed,
        }),
        "paper_example" => Ok(GeneratorSpec::PaperExample {
            example_id: id.ok_or("paper_example requires id")?,
        }),
        other => Err(format!("unknown generator kind {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_and_nested_specs() {
        let s = parse_gen_spec("low_rank,n=500,k=50", 7).unwrap();
        assert_eq!(s, GeneratorSpec::LowRank { n: 500, k: 50, seed: 7 });

        let s = parse_gen_spec("perturbed,eps=1e-3,base=(low_rank,n=20,k=4)", 3).unwrap();
        match s {
            GeneratorSpec::Perturbed { base, eps, seed } => {
                assert_eq!(eps, 1e-3);
                assert_eq!(seed, 3);
                assert_eq!(*base, GeneratorSpec::LowRank { n: 20, k: 4, seed: 3 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(parse_gen_spec("", 0).is_err());
        assert!(parse_gen_spec("low_rank,n=500", 0).is_err());
        assert!(parse_gen_spec("banana,n=2", 0).is_err());
        assert!(parse_gen_spec("perturbed,eps=1e-3", 0).is_err());
        assert!(parse_gen_spec("low_rank,n=500,k=50,zzz=1", 0).is_err());
    }
}
