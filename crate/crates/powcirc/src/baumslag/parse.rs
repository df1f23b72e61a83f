//! Word syntax: `item*` with `item := letter ('^' '-'? digits)?` over the
//! letters `a A t T b B 1`. Whitespace is ignored.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::GroupError;

/// Largest `|k|` accepted in `b^k`; the letters are expanded one by one.
const MAX_STABLE_POWER: i64 = 1 << 20;

/// One letter with its exponent folded in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    /// `a^e`
    A(BigInt),
    /// `t^e`
    T(BigInt),
    /// `b^k`, `k != 0`
    B(i64),
}

fn syntax(pos: usize, msg: impl Into<String>) -> GroupError {
    GroupError::Syntax {
        pos,
        msg: msg.into(),
    }
}

/// Tokenizes `text`. Positions in errors are character offsets.
pub fn parse_tokens(text: &str) -> Result<Vec<Token>, GroupError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    loop {
        skip_ws(&mut i);
        if i >= chars.len() {
            break;
        }
        let at = i;
        let letter = chars[i];
        if !matches!(letter, 'a' | 'A' | 't' | 'T' | 'b' | 'B' | '1') {
            return Err(syntax(at, format!("unexpected '{letter}'")));
        }
        i += 1;
        skip_ws(&mut i);
        let mut exp = BigInt::from(1);
        if i < chars.len() && chars[i] == '^' {
            let caret = i;
            i += 1;
            skip_ws(&mut i);
            let negative = i < chars.len() && chars[i] == '-';
            if negative {
                i += 1;
                skip_ws(&mut i);
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(syntax(caret, "exponent needs digits"));
            }
            let digits: String = chars[start..i].iter().collect();
            exp = digits.parse().expect("ascii digits");
            if negative {
                exp = -exp;
            }
        }
        match letter {
            'a' => out.push(Token::A(exp)),
            'A' => out.push(Token::A(-exp)),
            't' => out.push(Token::T(exp)),
            'T' => out.push(Token::T(-exp)),
            'b' | 'B' => {
                let k = exp
                    .to_i64()
                    .filter(|k| k.abs() <= MAX_STABLE_POWER)
                    .ok_or_else(|| syntax(at, "stable letter exponent too large"))?;
                let k = if letter == 'B' { -k } else { k };
                if k != 0 {
                    out.push(Token::B(k));
                }
            }
            _ => {}
        }
    }
    out.retain(|t| match t {
        Token::A(e) | Token::T(e) => !e.is_zero(),
        Token::B(_) => true,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_and_exponents() {
        assert_eq!(parse_tokens("").unwrap(), vec![]);
        assert_eq!(
            parse_tokens("aA").unwrap(),
            vec![Token::A(1.into()), Token::A((-1).into())]
        );
        assert_eq!(
            parse_tokens(" t^5 b ").unwrap(),
            vec![Token::T(5.into()), Token::B(1)]
        );
        assert_eq!(
            parse_tokens("B^-2 1 a^0 T^3").unwrap(),
            vec![Token::B(2), Token::T((-3).into())]
        );
    }

    #[test]
    fn errors_name_positions() {
        assert_eq!(
            parse_tokens("a b x"),
            Err(GroupError::Syntax {
                pos: 4,
                msg: "unexpected 'x'".into()
            })
        );
        assert!(matches!(parse_tokens("a^"), Err(GroupError::Syntax { pos: 1, .. })));
        assert!(matches!(parse_tokens("b^99999999999"), Err(GroupError::Syntax { pos: 0, .. })));
    }
}
