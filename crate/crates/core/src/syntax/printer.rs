//! Minimal-parenthesis printing, the inverse of the parser.

use super::Formula;

// Binding strength, loosest first.
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const PREFIX: u8 = 4;
const POSTFIX: u8 = 5;
const ATOM: u8 = 6;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        Formula::Not(_) | Formula::Expect(..) | Formula::Necessary(..) => PREFIX,
        Formula::Repeat(..) => POSTFIX,
        _ => ATOM,
    }
}

pub(super) fn print(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write_at(f: &Formula, min: u8, out: &mut String) {
    if level(f) < min {
        out.push('(');
        write(f, out);
        out.push(')');
    } else {
        write(f, out);
    }
}

fn write(f: &Formula, out: &mut String) {
    match f {
        Formula::Top => out.push('T'),
        Formula::Bot => out.push('F'),
        Formula::Var(x) => out.push_str(x),
        Formula::Ite(c, a, b) => {
            out.push('(');
            write(c, out);
            out.push_str(" ? ");
            write(a, out);
            out.push_str(" : ");
            write(b, out);
            out.push(')');
        }
        Formula::Cond { target, given, agent } => {
            out.push('[');
            write(target, out);
            out.push_str(" | ");
            write(given, out);
            out.push_str("]@");
            out.push_str(agent);
        }
        Formula::Implies(a, b) => {
            write_at(a, OR, out);
            out.push_str(" -> ");
            write_at(b, IMPLIES, out);
        }
        Formula::Or(a, b) => {
            write_at(a, OR, out);
            out.push_str(" v ");
            write_at(b, AND, out);
        }
        Formula::And(a, b) => {
            write_at(a, AND, out);
            out.push_str(" & ");
            write_at(b, PREFIX, out);
        }
        Formula::Not(a) => {
            out.push('~');
            write_at(a, PREFIX, out);
        }
        Formula::Expect(i, a) => {
            out.push_str("E@");
            out.push_str(i);
            out.push(' ');
            write_at(a, PREFIX, out);
        }
        Formula::Necessary(i, a) => {
            out.push_str("B@");
            out.push_str(i);
            out.push(' ');
            write_at(a, PREFIX, out);
        }
        Formula::Repeat(a, k, n) => {
            write_at(a, POSTFIX, out);
            out.push_str(&format!("^{{{k}/{n}}}"));
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::Formula;

    #[test]
    fn print_examples() {
        let x = Formula::var("x");
        assert_eq!(Formula::ite(x.clone(), Formula::Top, Formula::Bot).to_string(), "(x ? T : F)");
        assert_eq!(Formula::cond(x.clone(), Formula::Top, "a").to_string(), "[x | T]@a");
        assert_eq!(Formula::not(x.clone()).to_string(), "~x");
    }

    #[test]
    fn parenthesizes_only_when_needed() {
        let p = |s: &str| s.parse::<Formula>().unwrap().to_string();
        assert_eq!(p("(a v b) & c"), "(a v b) & c");
        assert_eq!(p("a v (b & c)"), "a v b & c");
        assert_eq!(p("(a -> b) -> c"), "(a -> b) -> c");
        assert_eq!(p("a -> (b -> c)"), "a -> b -> c");
        assert_eq!(p("a & (b & c)"), "a & (b & c)");
        assert_eq!(p("(~a)^{1/2}"), "(~a)^{1/2}");
        assert_eq!(p("(a & b)^{2/3}^{1/2}"), "(a & b)^{2/3}^{1/2}");
        assert_eq!(p("E@i (a & b)"), "E@i (a & b)");
        assert_eq!(p("~~B@i a"), "~~B@i a");
    }
}
