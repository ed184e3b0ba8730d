//! Name-based construction of Young functions.
//!
//! Leaf families are registered as constructors taking a parameter list;
//! the combinators `sum`, `product`, `compose` and `conjugate` are part of
//! the grammar and recurse into the registry for their operands.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::{
    Complementary, Composition, Power, PowerLog, Product, Spliced, Sum, YoungError, YoungFunction,
};

/// Builds a leaf family from its numeric parameters.
pub type Constructor = Arc<dyn Fn(&[f64]) -> Result<YoungFunction, YoungError> + Send + Sync>;

#[derive(Clone, Default)]
pub struct YoungRegistry {
    leaves: BTreeMap<String, Constructor>,
}

impl std::fmt::Debug for YoungRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("YoungRegistry")
            .field("families", &self.names())
            .finish()
    }
}

fn arity(family: &'static str, params: &[f64], n: usize) -> Result<(), YoungError> {
    if params.len() != n {
        return Err(YoungError::InvalidParams {
            family,
            reason: format!("expected {n} parameters, got {}", params.len()),
        });
    }
    Ok(())
}

impl YoungRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("power", |p| {
            arity("power", p, 1)?;
            Ok(YoungFunction::new(Power::new(p[0])?))
        });
        reg.register("powerlog", |p| {
            arity("powerlog", p, 3)?;
            Ok(YoungFunction::new(PowerLog::new(p[0], p[1], p[2])?))
        });
        reg.register("spliced", |p| {
            arity("spliced", p, 3)?;
            Ok(YoungFunction::new(Spliced::new(p[0], p[1], p[2])?))
        });
        reg
    }

    /// Registers (or replaces) a leaf family.
    pub fn register<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(&[f64]) -> Result<YoungFunction, YoungError> + Send + Sync + 'static,
    {
        self.leaves.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn names(&self) -> Vec<&str> {
        self.leaves.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, params: &[f64]) -> Result<YoungFunction, YoungError> {
        let ctor = self
            .leaves
            .get(name)
            .ok_or_else(|| YoungError::UnknownFamily(name.to_string()))?;
        ctor(params)
    }

    /// Parses a textual Young function such as `"sum(1*power:3,2*powerlog:1,1,1)"`.
    pub fn parse(&self, spec: &str) -> Result<YoungFunction, YoungError> {
        let err = |reason: &str| YoungError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let s = spec.trim();
        if s.is_empty() {
            return Err(err("empty spec"));
        }
        if let Some(open) = s.find('(') {
            let colon = s.find(':');
            if colon.is_none_or(|c| open < c) {
                if !s.ends_with(')') {
                    return Err(err("missing closing parenthesis"));
                }
                let head = s[..open].trim();
                let args = split_top_level(&s[open + 1..s.len() - 1]).map_err(|r| err(&r))?;
                return self.parse_combinator(spec, head, &args);
            }
        }
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r),
            None => (s, ""),
        };
        let params = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(&format!("bad number: {e}")))?
        };
        self.build(name, &params)
    }

    fn parse_combinator(
        &self,
        spec: &str,
        head: &str,
        args: &[&str],
    ) -> Result<YoungFunction, YoungError> {
        let err = |reason: String| YoungError::Parse {
            spec: spec.to_string(),
            reason,
        };
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(format!(
                    "{head} takes {n} operands, got {}",
                    args.len()
                )))
            }
        };
        match head {
            "product" => {
                want(2)?;
                Ok(YoungFunction::new(Product::new(
                    self.parse(args[0])?,
                    self.parse(args[1])?,
                )))
            }
            "compose" => {
                want(2)?;
                Ok(YoungFunction::new(Composition::new(
                    self.parse(args[0])?,
                    self.parse(args[1])?,
                )))
            }
            "conjugate" => {
                want(1)?;
                Ok(YoungFunction::new(Complementary::new(self.parse(args[0])?)))
            }
            "sum" => {
                want(2)?;
                let (w1, a) = self.weighted(spec, args[0])?;
                let (w2, b) = self.weighted(spec, args[1])?;
                Ok(YoungFunction::new(Sum::new(w1, a, w2, b)?))
            }
            other => Err(YoungError::UnknownFamily(other.to_string())),
        }
    }

    fn weighted(&self, spec: &str, arg: &str) -> Result<(f64, YoungFunction), YoungError> {
        // the weight is optional; `*` only appears as the weight separator
        match arg.split_once('*') {
            Some((w, rest)) if !w.contains('(') => {
                let w = w.trim().parse::<f64>().map_err(|e| YoungError::Parse {
                    spec: spec.to_string(),
                    reason: format!("bad weight {w:?}: {e}"),
                })?;
                Ok((w, self.parse(rest)?))
            }
            _ => Ok((1.0, self.parse(arg)?)),
        }
    }
}

/// Splits `s` at commas that separate operands.
///
/// A comma separates operands only at depth zero and only when the text that
/// follows starts a new function (a letter or a weight like `2*`), since leaf
/// parameter lists such as `powerlog:1,1,1` use commas too.
fn split_top_level(s: &str) -> Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, &c) in bytes.iter().enumerate() {
        match c {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced parentheses".into());
                }
            }
            b',' if depth == 0 && starts_operand(&s[i + 1..]) => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err("unbalanced parentheses".into());
    }
    parts.push(s[start..].trim());
    if parts.iter().any(|p| p.is_empty()) {
        return Err("empty operand".into());
    }
    Ok(parts)
}

fn starts_operand(rest: &str) -> bool {
    let rest = rest.trim_start();
    match rest.chars().next() {
        Some(c) if c.is_ascii_alphabetic() => true,
        Some(c) if c.is_ascii_digit() || c == '.' => {
            let num_end = rest
                .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+')))
                .unwrap_or(rest.len());
            rest[num_end..].trim_start().starts_with('*')
        }
        _ => false,
    }
}

fn default_registry() -> &'static YoungRegistry {
    static REGISTRY: OnceLock<YoungRegistry> = OnceLock::new();
    REGISTRY.get_or_init(YoungRegistry::with_builtins)
}

/// Parses a Young function with the built-in families.
pub fn parse_young(spec: &str) -> Result<YoungFunction, YoungError> {
    default_registry().parse(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::Family;

    #[test]
    fn parses_leaves() {
        let y = parse_young("power:3").unwrap();
        assert_eq!(y.family(), Family::Power);
        assert_eq!(y.describe(), "power:3");
        let y = parse_young("powerlog:1,1,1").unwrap();
        assert_eq!(y.indices().p_plus, 2.0);
        let y = parse_young(" spliced: 2, 3, 1 ").unwrap();
        assert_eq!(y.family(), Family::Spliced);
    }

    #[test]
    fn parses_combinators_and_round_trips() {
        for spec in [
            "product(power:3,power:3)",
            "compose(power:2.5,powerlog:1,1,1)",
            "sum(1*power:3,2*powerlog:1,1,1)",
            "sum(0.5*product(power:3,power:2),2*spliced:2,3,1)",
            "conjugate(powerlog:1,1,1)",
        ] {
            let y = parse_young(spec).unwrap();
            assert_eq!(y.describe(), spec);
            assert_eq!(parse_young(&y.describe()).unwrap().describe(), spec);
        }
        let y = parse_young("product(power:3,power:3)").unwrap();
        assert_eq!((y.indices().p_minus, y.indices().p_plus), (4.0, 4.0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            parse_young("cosh:1"),
            Err(YoungError::UnknownFamily(_))
        ));
        assert!(parse_young("power:1").is_err());
        assert!(parse_young("power:abc").is_err());
        assert!(parse_young("power:3,4").is_err());
        assert!(parse_young("product(power:3").is_err());
        assert!(parse_young("product(power:3)").is_err());
        assert!(parse_young("").is_err());
    }

    #[test]
    fn custom_families_can_be_registered() {
        let mut reg = YoungRegistry::with_builtins();
        reg.register("cube", |_| YoungFunction::power(4.0));
        assert_eq!(reg.parse("cube").unwrap().describe(), "power:4");
        assert!(reg.names().contains(&"cube"));
    }
}
