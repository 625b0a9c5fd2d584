use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(f64),
    Eq,
    Semi,
    Colon,
    Comma,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Source text of numeric literals, kept for integer checks.
    pub text: String,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok, text: String, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
                text,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '=' => push(Tok::Eq, String::new(), 1, &mut i, &mut col),
            ';' => push(Tok::Semi, String::new(), 1, &mut i, &mut col),
            ':' => push(Tok::Colon, String::new(), 1, &mut i, &mut col),
            ',' => push(Tok::Comma, String::new(), 1, &mut i, &mut col),
            '(' => push(Tok::LParen, String::new(), 1, &mut i, &mut col),
            ')' => push(Tok::RParen, String::new(), 1, &mut i, &mut col),
            '[' => push(Tok::LBrack, String::new(), 1, &mut i, &mut col),
            ']' => push(Tok::RBrack, String::new(), 1, &mut i, &mut col),
            '+' => push(Tok::Plus, String::new(), 1, &mut i, &mut col),
            '-' => push(Tok::Minus, String::new(), 1, &mut i, &mut col),
            '/' => push(Tok::Slash, String::new(), 1, &mut i, &mut col),
            '*' => {
                if chars.get(i + 1) == Some(&'*') {
                    push(Tok::StarStar, String::new(), 2, &mut i, &mut col)
                } else {
                    push(Tok::Star, String::new(), 1, &mut i, &mut col)
                }
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(tl, tc, format!("bad number `{text}`")))?;
                push(Tok::Num(v), text, j - start, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                push(Tok::Ident(text.clone()), text, j - start, &mut i, &mut col);
            }
            other => return Err(err(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        text: String::new(),
    });
    Ok(out)
}
