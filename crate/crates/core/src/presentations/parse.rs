use crate::error::{Error, ParseError, Result};
use crate::presentations::{FpPresentation, FreeWord, LSpec};

use super::pc::{Definition, NormalWord, PcPresentation, RelationId, Weight};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Pipe,
    Caret,
    Minus,
    Star,
    Eq,
    EqColon,
    Arrow,
    Int(u64),
    Ident(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Eq => "'='".into(),
            Tok::EqColon => "'=:'".into(),
            Tok::Arrow => "'<-'".into(),
        }
    }
}

fn tokenize(text: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'|' => Tok::Pipe,
            b'^' => Tok::Caret,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'=' => {
                if bytes.get(i + 1) == Some(&b':') {
                    i += 1;
                    Tok::EqColon
                } else {
                    Tok::Eq
                }
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') => {
                i += 1;
                Tok::Arrow
            }
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let value = text[i..j]
                    .parse::<u64>()
                    .map_err(|_| ParseError::new("integer too large", start))?;
                i = j;
                out.push((Tok::Int(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((Tok::Ident(text[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(format!("unexpected character {ch:?}"), start));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(text: &str, names: &'a [String]) -> std::result::Result<Self, ParseError> {
        Ok(Self {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
            names,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, o)| o)
    }

    fn error<T>(&self, message: impl Into<String>) -> std::result::Result<T, ParseError> {
        Err(ParseError::new(message, self.offset()))
    }

    fn unexpected<T>(&self, wanted: &str) -> std::result::Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> std::result::Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> std::result::Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn int(&mut self) -> std::result::Result<u64, ParseError> {
        match self.peek() {
            Some(&Tok::Int(v)) => {
                self.pos += 1;
                Ok(v)
            }
            _ => self.unexpected("integer"),
        }
    }

    fn signed_int(&mut self) -> std::result::Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        let at = self.offset();
        let v = self.int()?;
        let v = i64::try_from(v).map_err(|_| ParseError::new("exponent too large", at))?;
        Ok(if neg { -v } else { v })
    }

    /// Generator declarations up to and including `|`.
    fn declarations(&mut self) -> std::result::Result<Vec<String>, ParseError> {
        self.expect(&Tok::LBrace)?;
        let mut names: Vec<String> = Vec::new();
        if self.eat(&Tok::Pipe) {
            return Ok(names);
        }
        loop {
            let at = self.offset();
            match self.peek() {
                Some(Tok::Ident(s)) => {
                    if names.contains(s) {
                        return Err(ParseError::new(format!("generator {s:?} declared twice"), at));
                    }
                    names.push(s.clone());
                    self.pos += 1;
                }
                _ => return self.unexpected("generator name"),
            }
            if self.eat(&Tok::Pipe) {
                return Ok(names);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    /// Splits an identifier into declared generator names, longest match first.
    fn split_ident(&self, ident: &str, at: usize) -> std::result::Result<Vec<usize>, ParseError> {
        let mut out = Vec::new();
        let mut rest = ident;
        let mut offset = at;
        while !rest.is_empty() {
            let best = self
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match best {
                Some((g, n)) => {
                    out.push(g);
                    rest = &rest[n.len()..];
                    offset += n.len();
                }
                None => return Err(ParseError::new(format!("undeclared generator in {rest:?}"), offset)),
            }
        }
        Ok(out)
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_)) | Some(Tok::LParen) | Some(Tok::LBracket) | Some(Tok::Int(1))
        )
    }

    fn word(&mut self) -> std::result::Result<FreeWord, ParseError> {
        if !self.starts_factor() {
            return self.unexpected("word");
        }
        let mut w = FreeWord::identity();
        loop {
            if self.starts_factor() {
                let f = self.factor()?;
                w = w.concat(&f);
            } else if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
                if !self.starts_factor() {
                    return self.unexpected("word after '*'");
                }
            } else {
                return Ok(w);
            }
        }
    }

    fn factor(&mut self) -> std::result::Result<FreeWord, ParseError> {
        let at = self.offset();
        let mut base = match self.peek().cloned() {
            Some(Tok::Int(1)) => {
                self.pos += 1;
                FreeWord::identity()
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let gens = self.split_ident(&s, at)?;
                let (last, init) = gens.split_last().expect("identifier is nonempty");
                // An exponent binds to the final letter only.
                let prefix = FreeWord::from_letters(init.iter().map(|&g| (g, 1)));
                let tail = self.exponents(FreeWord::generator(*last))?;
                return Ok(prefix.concat(&tail));
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(&Tok::RParen)?;
                w
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut w = self.word()?;
                let mut args = 1;
                while self.eat(&Tok::Comma) {
                    let v = self.word()?;
                    w = FreeWord::commutator(&w, &v);
                    args += 1;
                }
                if args < 2 {
                    return self.error("a commutator needs at least two entries");
                }
                self.expect(&Tok::RBracket)?;
                w
            }
            _ => return self.unexpected("generator, '(' or '['"),
        };
        base = self.exponents(base)?;
        Ok(base)
    }

    fn exponents(&mut self, mut base: FreeWord) -> std::result::Result<FreeWord, ParseError> {
        while self.eat(&Tok::Caret) {
            let at = self.offset();
            match self.peek().cloned() {
                Some(Tok::Int(_)) | Some(Tok::Minus) => {
                    let e = self.signed_int()?;
                    if e == 0 {
                        return Err(ParseError::new("zero exponent", at));
                    }
                    base = base.pow(e);
                }
                Some(Tok::Ident(s)) => {
                    self.pos += 1;
                    let gens = self.split_ident(&s, at)?;
                    if gens.len() != 1 {
                        return Err(ParseError::new(
                            format!("conjugating word {s:?} must be parenthesised"),
                            at,
                        ));
                    }
                    base = base.conjugate(&FreeWord::generator(gens[0]));
                }
                Some(Tok::LParen) | Some(Tok::LBrace) => {
                    let close = if self.peek() == Some(&Tok::LParen) {
                        Tok::RParen
                    } else {
                        Tok::RBrace
                    };
                    self.pos += 1;
                    if matches!(self.peek(), Some(Tok::Minus))
                        || matches!(self.peek(), Some(Tok::Int(v)) if *v != 1)
                        || (matches!(self.peek(), Some(Tok::Int(1)))
                            && self.toks.get(self.pos + 1).map(|t| &t.0) == Some(&close))
                    {
                        let e = self.signed_int()?;
                        if e == 0 {
                            return Err(ParseError::new("zero exponent", at));
                        }
                        base = base.pow(e);
                    } else {
                        let by = self.word()?;
                        base = base.conjugate(&by);
                    }
                    self.expect(&close)?;
                }
                _ => return self.unexpected("exponent"),
            }
        }
        Ok(base)
    }

    /// `lhs`, `lhs = rhs` or `lhs =: rhs`, returned as `(lhs, rhs, is_definition)`.
    fn relation(&mut self) -> std::result::Result<(FreeWord, Option<FreeWord>, bool), ParseError> {
        let lhs = self.word()?;
        if self.eat(&Tok::Eq) {
            let rhs = self.word()?;
            Ok((lhs, Some(rhs), false))
        } else if self.eat(&Tok::EqColon) {
            let rhs = self.word()?;
            Ok((lhs, Some(rhs), true))
        } else {
            Ok((lhs, None, false))
        }
    }

    fn pair_list(&mut self) -> std::result::Result<Vec<(u64, u64)>, ParseError> {
        self.expect(&Tok::LBracket)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            self.expect(&Tok::LParen)?;
            let a = self.int()?;
            self.expect(&Tok::Comma)?;
            let b = self.int()?;
            self.expect(&Tok::RParen)?;
            out.push((a, b));
            if self.eat(&Tok::RBracket) {
                return Ok(out);
            }
            self.expect(&Tok::Comma)?;
        }
    }
}

/// Parses `{ g_1, ..., g_b | relators and relations }`.
pub fn parse_fp_presentation(text: &str) -> Result<FpPresentation> {
    let mut names_parser = Parser::new(text, &[])?;
    let names = names_parser.declarations()?;
    let mut p = Parser::new(text, &names)?;
    p.pos = names_parser.pos;
    let mut relators = Vec::new();
    if !p.eat(&Tok::RBrace) {
        loop {
            let at = p.offset();
            let (lhs, rhs, def) = p.relation()?;
            if def {
                return Err(ParseError::new("definitions are not allowed in a finite presentation", at).into());
            }
            let r = match rhs {
                Some(rhs) => lhs.concat(&rhs.inverse()),
                None => lhs,
            };
            relators.push(r);
            if p.eat(&Tok::RBrace) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    p.expect_end()?;
    FpPresentation::new(names, relators)
}

/// Parses `[(p_1,c_1), ..., (p_k,c_k)]`.
pub fn parse_lspec(text: &str) -> Result<LSpec> {
    let mut p = Parser::new(text, &[])?;
    let pairs = p.pair_list()?;
    p.expect_end()?;
    let mut out = Vec::with_capacity(pairs.len());
    for (prime, class) in pairs {
        let prime = u32::try_from(prime).map_err(|_| Error::InvalidSeries(format!("{prime} is too large")))?;
        out.push((prime, class as usize));
    }
    LSpec::new(out)
}

fn normal_word(
    w: &FreeWord,
    names: &[String],
    primes: &[u32],
    at: usize,
) -> std::result::Result<NormalWord, ParseError> {
    let mut exps = vec![0u32; names.len()];
    let mut last: Option<usize> = None;
    for &(g, e) in w.letters() {
        if last.is_some_and(|l| g <= l) || e < 1 || e as u64 >= primes[g] as u64 {
            return Err(ParseError::new(
                format!("right-hand side {} is not a normal word", w.display(names)),
                at,
            ));
        }
        exps[g] = e as u32;
        last = Some(g);
    }
    Ok(NormalWord::from_exponents(exps))
}

/// Parses a power-conjugate presentation, optionally followed by
/// `weights [(pair,class), ...]` and `images [gen <- index, ...]`.
///
/// Relative orders are read from the power relations, so every generator
/// needs one. Conjugate relations must all be present.
pub fn parse_pc_presentation(text: &str) -> Result<PcPresentation> {
    let mut names_parser = Parser::new(text, &[])?;
    let names = names_parser.declarations()?;
    let n = names.len();
    let mut p = Parser::new(text, &names)?;
    p.pos = names_parser.pos;

    let mut raw: Vec<(usize, FreeWord, Option<FreeWord>, bool)> = Vec::new();
    if !p.eat(&Tok::RBrace) {
        loop {
            let at = p.offset();
            let (lhs, rhs, def) = p.relation()?;
            raw.push((at, lhs, rhs, def));
            if p.eat(&Tok::RBrace) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }

    let mut primes = vec![0u32; n];
    let mut power_items = vec![None; n];
    let mut conj_items = vec![vec![None; n]; n];
    for (at, lhs, rhs, def) in raw {
        let rhs = rhs.unwrap_or_default();
        match *lhs.letters() {
            [(g, e)] if e >= 2 => {
                if power_items[g].is_some() {
                    return Err(ParseError::new(format!("second power relation for {}", names[g]), at).into());
                }
                let prime = u32::try_from(e).unwrap_or(0);
                if !super::is_prime(prime as u64) {
                    return Err(ParseError::new(format!("relative order {e} of {} is not prime", names[g]), at).into());
                }
                primes[g] = prime;
                power_items[g] = Some((at, rhs, def));
            }
            [(j, -1), (k, 1), (j2, 1)] if j == j2 && j < k => {
                if conj_items[k][j].is_some() {
                    return Err(ParseError::new(format!("second relation for {}^{}", names[k], names[j]), at).into());
                }
                conj_items[k][j] = Some((at, rhs, def));
            }
            _ => {
                return Err(ParseError::new(
                    format!(
                        "left-hand side {} is neither a prime power nor a conjugate a_k^a_j with j < k",
                        lhs.display(&names)
                    ),
                    at,
                )
                .into())
            }
        }
    }

    let mut powers = Vec::with_capacity(n);
    let mut conjugates = Vec::with_capacity(n);
    let mut definitions: Vec<Option<Definition>> = vec![None; n];
    let mut mark = |rel: RelationId, rhs: &NormalWord, at: usize| -> Result<()> {
        let Some((x, 1)) = rhs.last_letter() else {
            return Err(ParseError::new("a definition must end in its generator with exponent 1", at).into());
        };
        if definitions[x].is_some() {
            return Err(ParseError::new(format!("{} has two definitions", names[x]), at).into());
        }
        definitions[x] = Some(Definition::Relation(rel));
        Ok(())
    };
    for k in 0..n {
        let Some((at, rhs, def)) = power_items[k].take() else {
            return Err(ParseError::new(format!("missing power relation for {}", names[k]), p.offset()).into());
        };
        let w = normal_word(&rhs, &names, &primes, at)?;
        if def {
            mark(RelationId::Power(k), &w, at)?;
        }
        powers.push(w);
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let Some((at, rhs, def)) = conj_items[k][j].take() else {
                return Err(ParseError::new(
                    format!("missing conjugate relation {}^{}", names[k], names[j]),
                    p.offset(),
                )
                .into());
            };
            let w = normal_word(&rhs, &names, &primes, at)?;
            if def {
                mark(RelationId::Conjugate { j, k }, &w, at)?;
            }
            row.push(w);
        }
        conjugates.push(row);
    }

    let mut weights = PcPresentation::default_weights(&primes);
    loop {
        let at = p.offset();
        match p.peek() {
            Some(Tok::Ident(s)) if s == "weights" => {
                p.pos += 1;
                let list = p.pair_list()?;
                if list.len() != n {
                    return Err(ParseError::new("one weight per generator required", at).into());
                }
                weights = list
                    .into_iter()
                    .map(|(a, b)| Weight::new(a as usize, b as usize))
                    .collect();
            }
            Some(Tok::Ident(s)) if s == "images" => {
                p.pos += 1;
                p.expect(&Tok::LBracket)?;
                if !p.eat(&Tok::RBracket) {
                    loop {
                        let at = p.offset();
                        let x = match p.peek() {
                            Some(Tok::Ident(s)) => match names.iter().position(|n| n == s) {
                                Some(x) => x,
                                None => return Err(ParseError::new(format!("unknown generator {s:?}"), at).into()),
                            },
                            _ => return Err(p.unexpected::<()>("generator name").unwrap_err().into()),
                        };
                        p.pos += 1;
                        p.expect(&Tok::Arrow)?;
                        let at_g = p.offset();
                        let g = p.int()?;
                        if g == 0 {
                            return Err(ParseError::new("image indices count from 1", at_g).into());
                        }
                        if definitions[x].is_some() {
                            return Err(ParseError::new(format!("{} has two definitions", names[x]), at).into());
                        }
                        definitions[x] = Some(Definition::Image(g as usize - 1));
                        if p.eat(&Tok::RBracket) {
                            break;
                        }
                        p.expect(&Tok::Comma)?;
                    }
                }
            }
            None => break,
            _ => {
                return Err(p
                    .unexpected::<()>("'weights', 'images' or end of input")
                    .unwrap_err()
                    .into())
            }
        }
    }

    PcPresentation::new(names, primes, powers, conjugates, weights, definitions)
}

/// Parses a word over the generators of `pc`.
pub fn parse_pc_word(pc: &PcPresentation, text: &str) -> Result<FreeWord> {
    let mut p = Parser::new(text, pc.names())?;
    if p.at_end() {
        return Ok(FreeWord::identity());
    }
    let w = p.word()?;
    p.expect_end()?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S4: &str = "{ a, b, c, d | a^2 =: c, b^a = b^2 c, b^3, c^a = c, c^b =: d, c^2,
        d^a = cd, d^b = cd, d^c = d, d^2 }";

    #[test]
    fn fp_examples() {
        let g = parse_fp_presentation("{a,b | (ab)^2b^-6, a^4b^-1ab^-9a^-1b}").unwrap();
        assert_eq!(g.generator_count(), 2);
        assert_eq!(g.relators().len(), 2);
        assert_eq!(g.relators()[0].letters(), &[(0, 1), (1, 1), (0, 1), (1, -5)]);

        let t = parse_fp_presentation("{x | x}").unwrap();
        assert_eq!(t.relators()[0].letters(), &[(0, 1)]);

        let c = parse_fp_presentation("{x,y | [x,y]}").unwrap();
        assert_eq!(c.relators()[0].letters(), &[(0, -1), (1, -1), (0, 1), (1, 1)]);
    }

    #[test]
    fn fp_relations_and_conjugates() {
        let g = parse_fp_presentation("{x,y | x^8, y^3, (x^-1y)^2, (yx^3yx)^2 = x^4}").unwrap();
        assert_eq!(g.relators().len(), 4);
        let r = &g.relators()[3];
        let expect = FreeWord::from_letters([(1, 1), (0, 3), (1, 1), (0, 1), (1, 1), (0, 3), (1, 1), (0, 1), (0, -4)]);
        assert_eq!(r, &expect);

        let h = parse_fp_presentation("{a,b | (a a^(b^-1))^2, a^b, a^{-1}}").unwrap();
        assert_eq!(h.relators()[1].letters(), &[(1, -1), (0, 1), (1, 1)]);
        assert_eq!(h.relators()[2].letters(), &[(0, -1)]);
        assert_eq!(
            h.relators()[0],
            FreeWord::from_letters([(0, 1), (1, 1), (0, 1), (1, -1), (0, 1), (1, 1), (0, 1), (1, -1)])
        );
    }

    #[test]
    fn fp_errors_carry_positions() {
        let e = parse_fp_presentation("{a | a^0}").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { position: 7, .. })), "{e:?}");
        let e = parse_fp_presentation("{a | ab}").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { position: 6, .. })), "{e:?}");
        assert!(parse_fp_presentation("{a | a,}").is_err());
        assert!(parse_fp_presentation("{ | }").is_err());
    }

    #[test]
    fn longest_match_split() {
        let g = parse_fp_presentation("{a, ab, b | ab b a}").unwrap();
        assert_eq!(g.relators()[0].letters(), &[(1, 1), (2, 1), (0, 1)]);
    }

    #[test]
    fn lspec_examples() {
        assert_eq!(parse_lspec("[(2,1),(3,1),(2,2),(3,2)]").unwrap().len(), 4);
        assert_eq!(parse_lspec("[(2,1)]").unwrap().pairs(), &[(2, 1)]);
        assert!(parse_lspec("[(2,1),(2,1)]").is_err());
        assert!(parse_lspec("[(6,1)]").is_err());
        assert!(parse_lspec("[(2,0)]").is_err());
        assert!(parse_lspec("[(2,1)").is_err());
    }

    #[test]
    fn s4_parses() {
        let pc = parse_pc_presentation(S4).unwrap();
        assert_eq!(pc.len(), 4);
        assert_eq!(pc.primes(), &[2, 3, 2, 2]);
        assert_eq!(pc.definitions()[2], Some(Definition::Relation(RelationId::Power(0))));
        assert_eq!(
            pc.definitions()[3],
            Some(Definition::Relation(RelationId::Conjugate { j: 1, k: 2 }))
        );
        assert_eq!(pc.conjugate(0, 1).exponents(), &[0, 2, 1, 0]);
        assert_eq!(pc.generator_number(), 2);
    }

    #[test]
    fn empty_pc() {
        let pc = parse_pc_presentation("{ | }").unwrap();
        assert!(pc.is_empty());
        assert_eq!(parse_pc_presentation(&pc.to_string()).unwrap(), pc);
    }

    #[test]
    fn pc_round_trip() {
        let pc = parse_pc_presentation(S4).unwrap();
        let text = pc.to_string();
        let again = parse_pc_presentation(&text).unwrap();
        assert_eq!(again, pc);
        assert_eq!(again.to_string(), text);
    }

    #[test]
    fn pc_rejects_corruptions() {
        let missing = S4.replace("d^c = d, ", "");
        assert!(parse_pc_presentation(&missing).is_err());
        let out_of_range = S4.replace("b^a = b^2 c", "b^a = b^3 c");
        assert!(parse_pc_presentation(&out_of_range).is_err());
        let low_index = S4.replace("d^b = cd", "d^b = b d");
        assert!(parse_pc_presentation(&low_index).is_err());
        let bad_def = S4.replace("d^c = d", "d^c =: d");
        assert!(parse_pc_presentation(&bad_def).is_err());
        let twice = S4.replace("c^2", "c^2, c^2");
        assert!(parse_pc_presentation(&twice).is_err());
        let not_normal = S4.replace("d^a = cd", "d^a = dc");
        assert!(parse_pc_presentation(&not_normal).is_err());
    }

    #[test]
    fn weights_and_images() {
        let text = format!("{S4} weights [(1,1),(2,1),(3,1),(3,1)] images [a <- 1, b <- 2]");
        let pc = parse_pc_presentation(&text).unwrap();
        assert_eq!(pc.weights()[3], Weight::new(3, 1));
        assert_eq!(pc.definitions()[1], Some(Definition::Image(1)));
        assert_eq!(parse_pc_presentation(&pc.to_string()).unwrap(), pc);
    }

    #[test]
    fn pc_words() {
        let pc = parse_pc_presentation(S4).unwrap();
        assert_eq!(parse_pc_word(&pc, "bba").unwrap().letters(), &[(1, 2), (0, 1)]);
        assert_eq!(parse_pc_word(&pc, "a^-1").unwrap().letters(), &[(0, -1)]);
        assert!(parse_pc_word(&pc, "").unwrap().is_identity());
    }
}
