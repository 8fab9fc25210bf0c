//! Tokenizer for the `.ssec` surface language. Newlines are significant
//! (declarations and trailing identifier lists are line-terminated), so the
//! lexer emits them as tokens. `//` comments run to end of line; both LF and
//! CRLF are accepted.

use crate::diag::{Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Float(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Hash,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Float(x) => format!("number `{x}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Assign => "`=`".to_string(),
            Tok::EqEq => "`==`".to_string(),
            Tok::Ne => "`!=`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Ge => "`>=`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Slash => "`/`".to_string(),
            Tok::Hash => "`#`".to_string(),
            Tok::Newline => "end of line".to_string(),
            Tok::Eof => "end of file".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $sl:expr, $sc:expr, $el:expr, $ec:expr) => {
            tokens.push(Token {
                tok: $tok,
                span: SourceSpan::new(file, $sl, $sc, $el, $ec),
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (sl, sc) = (line, col);
        match c {
            '\n' => {
                push!(Tok::Newline, sl, sc, sl, sc);
                i += 1;
                line += 1;
                col = 1;
            }
            '\r' => {
                // CRLF or stray CR both terminate the line.
                if i + 1 < chars.len() && chars[i + 1] == '\n' {
                    i += 1;
                }
                push!(Tok::Newline, sl, sc, sl, sc);
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' => {
                i += 1;
                col += 1;
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' && chars[i] != '\r' {
                    i += 1;
                    col += 1;
                }
            }
            '{' => {
                push!(Tok::LBrace, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '}' => {
                push!(Tok::RBrace, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '(' => {
                push!(Tok::LParen, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            ')' => {
                push!(Tok::RParen, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            ',' => {
                push!(Tok::Comma, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '.' => {
                push!(Tok::Dot, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            ':' => {
                push!(Tok::Colon, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '#' => {
                push!(Tok::Hash, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '+' => {
                push!(Tok::Plus, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '*' => {
                push!(Tok::Star, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '/' => {
                push!(Tok::Slash, sl, sc, sl, sc);
                i += 1;
                col += 1;
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    push!(Tok::Arrow, sl, sc, sl, sc + 1);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Minus, sl, sc, sl, sc);
                    i += 1;
                    col += 1;
                }
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::EqEq, sl, sc, sl, sc + 1);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Assign, sl, sc, sl, sc);
                    i += 1;
                    col += 1;
                }
            }
            '!' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Ne, sl, sc, sl, sc + 1);
                    i += 2;
                    col += 2;
                } else {
                    diags.push(Diagnostic::error(
                        "unexpected character `!` (did you mean `!=`?)",
                        Some(SourceSpan::point(file, sl, sc)),
                    ));
                    i += 1;
                    col += 1;
                }
            }
            '<' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Le, sl, sc, sl, sc + 1);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Lt, sl, sc, sl, sc);
                    i += 1;
                    col += 1;
                }
            }
            '>' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Ge, sl, sc, sl, sc + 1);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Gt, sl, sc, sl, sc);
                    i += 1;
                    col += 1;
                }
            }
            '"' => {
                let mut value = String::new();
                let mut j = i + 1;
                let mut ecol = col + 1;
                let eline = line;
                let mut terminated = false;
                while j < chars.len() {
                    match chars[j] {
                        '"' => {
                            terminated = true;
                            break;
                        }
                        '\\' if j + 1 < chars.len() => {
                            let esc = chars[j + 1];
                            value.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                '\\' => '\\',
                                '"' => '"',
                                other => {
                                    diags.push(Diagnostic::error(
                                        format!("unknown escape `\\{other}`"),
                                        Some(SourceSpan::point(file, eline, ecol)),
                                    ));
                                    other
                                }
                            });
                            j += 2;
                            ecol += 2;
                        }
                        '\n' => {
                            break;
                        }
                        other => {
                            value.push(other);
                            j += 1;
                            ecol += 1;
                        }
                    }
                }
                if !terminated {
                    diags.push(Diagnostic::error(
                        "unterminated string literal",
                        Some(SourceSpan::point(file, sl, sc)),
                    ));
                    i = j;
                    col = ecol;
                } else {
                    push!(Tok::Str(value), sl, sc, eline, ecol);
                    i = j + 1;
                    col = ecol + 1;
                }
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut is_float = false;
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    is_float = true;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let ec = sc + (j - i) as u32 - 1;
                if is_float {
                    match text.parse::<f64>() {
                        Ok(x) => push!(Tok::Float(x), sl, sc, sl, ec),
                        Err(_) => diags.push(Diagnostic::error(
                            format!("invalid number `{text}`"),
                            Some(SourceSpan::new(file, sl, sc, sl, ec)),
                        )),
                    }
                } else {
                    match text.parse::<u64>() {
                        Ok(n) => push!(Tok::Int(n), sl, sc, sl, ec),
                        Err(_) => diags.push(Diagnostic::error(
                            format!("integer `{text}` out of range"),
                            Some(SourceSpan::new(file, sl, sc, sl, ec)),
                        )),
                    }
                }
                col += (j - i) as u32;
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let ec = sc + (j - i) as u32 - 1;
                push!(Tok::Ident(text), sl, sc, sl, ec);
                col += (j - i) as u32;
                i = j;
            }
            other => {
                diags.push(Diagnostic::error(
                    format!("unexpected character `{other}`"),
                    Some(SourceSpan::point(file, sl, sc)),
                ));
                i += 1;
                col += 1;
            }
        }
    }
    let span = SourceSpan::point(file, line, col);
    tokens.push(Token {
        tok: Tok::Eof,
        span,
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        let (tokens, diags) = lex(text, "t.ssec");
        assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
        tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        let ts = toks("block ECU1 { attribute PSK1 : key }");
        assert_eq!(
            ts,
            vec![
                Tok::Ident("block".into()),
                Tok::Ident("ECU1".into()),
                Tok::LBrace,
                Tok::Ident("attribute".into()),
                Tok::Ident("PSK1".into()),
                Tok::Colon,
                Tok::Ident("key".into()),
                Tok::RBrace,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn comments_and_crlf() {
        let ts = toks("a // c\r\nb\n");
        assert_eq!(
            ts,
            vec![
                Tok::Ident("a".into()),
                Tok::Newline,
                Tok::Ident("b".into()),
                Tok::Newline,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn operators() {
        let ts = toks("a == b != c -> d <= e >= f = g");
        assert!(ts.contains(&Tok::EqEq));
        assert!(ts.contains(&Tok::Ne));
        assert!(ts.contains(&Tok::Arrow));
        assert!(ts.contains(&Tok::Le));
        assert!(ts.contains(&Tok::Ge));
        assert!(ts.contains(&Tok::Assign));
    }

    #[test]
    fn string_escapes_and_unicode() {
        let (tokens, diags) = lex("title \"caf\\u00e9\"", "t.ssec");
        // \u is not a supported escape: reports a diagnostic but keeps going
        assert_eq!(diags.len(), 1);
        assert!(tokens.iter().any(|t| matches!(t.tok, Tok::Str(_))));
        let ts = toks("title \"café — naïve\"");
        assert_eq!(ts[1], Tok::Str("café — naïve".into()));
    }

    #[test]
    fn numbers() {
        let ts = toks("500000 0.5");
        assert_eq!(ts[0], Tok::Int(500000));
        assert_eq!(ts[1], Tok::Float(0.5));
    }

    #[test]
    fn spans_are_one_based_and_in_bounds() {
        let (tokens, _) = lex("a\n  bb", "t.ssec");
        assert_eq!(tokens[0].span.start_line, 1);
        assert_eq!(tokens[0].span.start_col, 1);
        let bb = &tokens[2];
        assert_eq!(bb.span.start_line, 2);
        assert_eq!(bb.span.start_col, 3);
        assert_eq!(bb.span.end_col, 4);
    }
}
