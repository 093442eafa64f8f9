use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torickgk_core::expr::{parse, EvalError, ParseError};

/// Evaluates straight from the text, without building a tree.
struct Reference<'a> {
    s: &'a [u8],
    i: usize,
    x: &'a [f64],
}

impl Reference<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i] == b' ' {
            self.i += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }
    fn sum(&mut self) -> Option<f64> {
        let mut v = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.product()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Some(v)
    }
    fn product(&mut self) -> Option<f64> {
        let mut v = self.signed()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.i += 1;
            let r = self.signed()?;
            if c == b'/' && r == 0.0 {
                return None;
            }
            v = if c == b'*' { v * r } else { v / r };
        }
        Some(v)
    }
    fn signed(&mut self) -> Option<f64> {
        if self.peek() == Some(b'-') {
            self.i += 1;
            return Some(-self.signed()?);
        }
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let e = self.signed()?;
            return Some(base.powf(e));
        }
        Some(base)
    }
    fn primary(&mut self) -> Option<f64> {
        match self.peek()? {
            b'(' => {
                self.i += 1;
                let v = self.sum()?;
                assert_eq!(self.peek(), Some(b')'));
                self.i += 1;
                Some(v)
            }
            b'0'..=b'9' | b'.' => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
                    self.i += 1;
                }
                std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().ok()
            }
            _ => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                if let Some(k) = name.strip_prefix("mu") {
                    return Some(self.x[k.parse::<usize>().unwrap() - 1]);
                }
                assert_eq!(self.peek(), Some(b'('));
                self.i += 1;
                let a = self.sum()?;
                assert_eq!(self.peek(), Some(b')'));
                self.i += 1;
                match name {
                    "log" if a > 0.0 => Some(a.ln()),
                    "sqrt" if a >= 0.0 => Some(a.sqrt()),
                    "exp" => Some(a.exp()),
                    _ => None,
                }
            }
        }
    }
}

fn reference(src: &str, x: &[f64]) -> Option<f64> {
    let mut r = Reference { s: src.as_bytes(), i: 0, x };
    let v = r.sum()?;
    assert_eq!(r.peek(), None);
    if v.is_finite() {
        Some(v)
    } else {
        None
    }
}

fn gen(rng: &mut ChaCha8Rng, depth: u32, m: usize) -> String {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.5) {
            format!("mu{}", rng.random_range(1..=m))
        } else {
            format!("{:.3}", rng.random_range(0.1..3.0))
        };
    }
    let sp = if rng.random_bool(0.3) { " " } else { "" };
    match rng.random_range(0..9) {
        0 => format!("{}{sp}+{sp}{}", gen(rng, depth - 1, m), gen(rng, depth - 1, m)),
        1 => format!("{}{sp}-{sp}{}", gen(rng, depth - 1, m), gen(rng, depth - 1, m)),
        2 => format!("{}*{}", gen(rng, depth - 1, m), gen(rng, depth - 1, m)),
        3 => format!("{}/{}", gen(rng, depth - 1, m), gen(rng, depth - 1, m)),
        4 => format!("({})^{}", gen(rng, depth - 1, m), ["2", "0.5", "-1", "3"][rng.random_range(0..4)]),
        5 => format!("-{}", gen(rng, depth - 1, m)),
        6 => format!("({})", gen(rng, depth - 1, m)),
        7 => format!("{}({})", ["log", "sqrt", "exp"][rng.random_range(0..3)], gen(rng, depth - 1, m)),
        _ => format!("mu{}^2", rng.random_range(1..=m)),
    }
}

#[test]
fn differential_against_reference_evaluator() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=3);
        let src = gen(&mut rng, 4, m);
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
        let ast = parse(&src, m).unwrap_or_else(|e| panic!("{src}: {e}"));
        let got = ast.eval(&x).ok().filter(|v| v.is_finite());
        let want = reference(&src, &x);
        match (got, want) {
            (Some(a), Some(b)) => {
                assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0), "{src}: {a} vs {b}");
                compared += 1;
            }
            (None, None) => {}
            (a, b) => panic!("{src} at {x:?}: {a:?} vs {b:?}"),
        }
    }
    assert!(compared > 700, "only {compared} expressions evaluated");
}

#[test]
fn spec_examples() {
    assert_eq!(parse("mu1^2 + 0.5*log(mu2)", 2).unwrap().eval(&[2.0, 1.0]).unwrap(), 4.0);
    assert!(matches!(parse("mu1*(", 1), Err(ParseError::SyntaxError { position: 5, .. })));
    assert_eq!(parse("2^3^2", 1).unwrap().eval(&[0.0]).unwrap(), 512.0);
    assert_eq!(parse("-2^2", 1).unwrap().eval(&[0.0]).unwrap(), -4.0);
    assert!((parse("log(mu1)", 1).unwrap().eval(&[std::f64::consts::E]).unwrap() - 1.0).abs() <= 1e-15);
    assert!(matches!(parse("1/mu1", 1).unwrap().eval(&[0.0]), Err(EvalError::DivByZero { .. })));
    assert_eq!(parse("sqrt(mu1*mu2)", 2).unwrap().eval(&[4.0, 9.0]).unwrap(), 6.0);
    assert!(matches!(parse("log(-mu1)", 1).unwrap().eval(&[1.0]), Err(EvalError::DomainError { .. })));
    assert!(matches!(parse("mu3", 2), Err(ParseError::DimensionMismatch { index: 3, dim: 2, .. })));
    assert!(matches!(parse("sin(mu1)", 1), Err(ParseError::UnknownIdentifier { .. })));
    assert!(matches!(parse("log(mu1, 2)", 1), Err(ParseError::ArityError { .. })));
    assert!(matches!(parse("log()", 1), Err(ParseError::ArityError { .. })));
    assert!(matches!(parse("2 mu1", 1), Err(ParseError::SyntaxError { .. })));
}

proptest! {
    #[test]
    fn print_parse_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = gen(&mut rng, 5, 3);
        let a = parse(&src, 3).unwrap();
        let printed = a.to_string();
        let b = parse(&printed, 3).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(printed, b.to_string());
    }
}
