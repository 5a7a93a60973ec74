use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) => SUM,
        Expr::Mul(_) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => POWER,
        Expr::Const(_) | Expr::Sym(_) | Expr::Call(..) => ATOM,
    }
}

pub(super) fn render(e: &Expr) -> String {
    let mut out = String::new();
    write(e, 0, &mut out);
    out
}

fn write(e: &Expr, min: u8, out: &mut String) {
    if precedence(e) < min {
        out.push('(');
        write_bare(e, out);
        out.push(')');
    } else {
        write_bare(e, out);
    }
}

fn write_const(c: f64, out: &mut String) {
    // A leading minus would be re-parsed as a folded literal or as `Neg`
    // depending on context, so negative constants are always parenthesized.
    if c.is_sign_negative() {
        out.push('(');
        out.push_str(&c.to_string());
        out.push(')');
    } else {
        out.push_str(&c.to_string());
    }
}

fn write_bare(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) => write_const(*c, out),
        Expr::Sym(s) => out.push_str(s),
        Expr::Call(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write(arg, 0, out);
            out.push(')');
        }
        Expr::Pow(base, n) => {
            write(base, ATOM, out);
            out.push('^');
            out.push_str(&n.to_string());
        }
        Expr::Neg(inner) => {
            out.push('-');
            if let Expr::Const(c) = **inner {
                out.push('(');
                out.push_str(&c.to_string());
                out.push(')');
            } else {
                write(inner, UNARY, out);
            }
        }
        Expr::Mul(factors) => {
            if factors.is_empty() {
                out.push('1');
            }
            for (i, f) in factors.iter().enumerate() {
                if i == 0 {
                    write(f, UNARY, out);
                    continue;
                }
                match f {
                    Expr::Pow(base, -1) => {
                        out.push_str(" / ");
                        write(base, UNARY, out);
                    }
                    Expr::Neg(_) => {
                        out.push_str(" * (");
                        write_bare(f, out);
                        out.push(')');
                    }
                    _ => {
                        out.push_str(" * ");
                        write(f, UNARY, out);
                    }
                }
            }
        }
        Expr::Add(terms) => {
            if terms.is_empty() {
                out.push('0');
            }
            for (i, term) in terms.iter().enumerate() {
                if i == 0 {
                    write(term, PRODUCT, out);
                    continue;
                }
                match term {
                    Expr::Neg(inner) => {
                        out.push_str(" - ");
                        write(inner, PRODUCT, out);
                    }
                    _ => {
                        out.push_str(" + ");
                        write(term, PRODUCT, out);
                    }
                }
            }
        }
    }
}
