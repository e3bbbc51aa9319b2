use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Univ(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Colon,
    ColonEq,
    Dot,
    Comma,
    Semi,
    Arrow,
    FatArrow,
    Turnstile,
    TurnstileHash,
    Bar,
    Backslash,
    HashEval,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Univ(k) => format!("`U{k}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Colon => ":",
            Tok::ColonEq => ":=",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Turnstile => "|-",
            Tok::TurnstileHash => "|-#",
            Tok::Bar => "|",
            Tok::Backslash => "\\",
            Tok::HashEval => "#eval",
            Tok::Ident(_) => "identifier",
            Tok::Univ(_) => "universe",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let rest = &src[i..];
        let (tok, len) = if is_ident_start(c) {
            let len = rest.find(|ch: char| !is_ident_char(ch)).unwrap_or(rest.len());
            let word = &rest[..len];
            let univ = word
                .strip_prefix('U')
                .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|d| d.parse::<u32>().ok());
            match univ {
                Some(k) => (Tok::Univ(k), len),
                None => (Tok::Ident(word.to_string()), len),
            }
        } else if rest.starts_with("#eval") {
            (Tok::HashEval, 5)
        } else if rest.starts_with("|-#") {
            (Tok::TurnstileHash, 3)
        } else if rest.starts_with("|-") {
            (Tok::Turnstile, 2)
        } else if rest.starts_with(":=") {
            (Tok::ColonEq, 2)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("=>") {
            (Tok::FatArrow, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '|' => Tok::Bar,
                '\\' => Tok::Backslash,
                _ => {
                    return Err(ParseError {
                        offset: start,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (t, 1)
        };
        out.push(Token { tok, offset: start });
        i += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: src.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        let toks: Vec<Tok> = lex("def f : [x:tm |- x] := U0. % c\n#eval f.").unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("def".into()),
                Tok::Ident("f".into()),
                Tok::Colon,
                Tok::LBrack,
                Tok::Ident("x".into()),
                Tok::Colon,
                Tok::Ident("tm".into()),
                Tok::Turnstile,
                Tok::Ident("x".into()),
                Tok::RBrack,
                Tok::ColonEq,
                Tok::Univ(0),
                Tok::Dot,
                Tok::HashEval,
                Tok::Ident("f".into()),
                Tok::Dot,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn offsets_are_bytes() {
        let toks = lex("% é\nx").unwrap();
        assert_eq!(toks[0].offset, 5);
    }

    #[test]
    fn rejects_stray_characters() {
        assert_eq!(lex("x @").unwrap_err().offset, 2);
    }
}
