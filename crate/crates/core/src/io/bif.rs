//! Reader for the discrete subset of the BIF interchange format.
//!
//! Supported: `network`, `variable` (`type discrete`) and `probability` blocks,
//! with `table`, `default` and parenthesized conditional rows. `property`
//! statements are skipped. `//` and `/* */` comments are ignored.
//!
//! A `table` statement on a node with parents is read child-state major: all
//! parent configurations for the first child state, then for the second, and so
//! on, which is the layout used by the common Python readers.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::network::{Cpt, Network, Variable};

/// Column tolerance for BIF input. Published files print probabilities with
/// about seven significant digits, so columns such as `0.3333333` three times
/// miss 1 by 1e-7.
pub const BIF_NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const PUNCT: &[char] = &['{', '}', '(', ')', '[', ']', ',', ';', '|'];

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let advance = |c: char, line: &mut usize, column: &mut usize| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(c, &mut line, &mut column);
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                column += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (start_line, start_column) = (line, column);
            i += 2;
            column += 2;
            loop {
                if i + 1 >= chars.len() {
                    return Err(Error::Syntax {
                        line: start_line,
                        column: start_column,
                        message: "unterminated block comment".into(),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    column += 2;
                    break;
                }
                advance(chars[i], &mut line, &mut column);
                i += 1;
            }
        } else if PUNCT.contains(&c) {
            tokens.push(Token {
                tok: Tok::Punct(c),
                line,
                column,
            });
            i += 1;
            column += 1;
        } else if c == '"' {
            let (start_line, start_column) = (line, column);
            let mut word = String::new();
            i += 1;
            column += 1;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(Error::Syntax {
                            line: start_line,
                            column: start_column,
                            message: "unterminated string".into(),
                        })
                    }
                    Some('"') => {
                        i += 1;
                        column += 1;
                        break;
                    }
                    Some(&ch) => {
                        word.push(ch);
                        advance(ch, &mut line, &mut column);
                        i += 1;
                    }
                }
            }
            tokens.push(Token {
                tok: Tok::Word(word),
                line: start_line,
                column: start_column,
            });
        } else {
            let start_column = column;
            let mut word = String::new();
            while i < chars.len() {
                let ch = chars[i];
                if ch.is_whitespace() || PUNCT.contains(&ch) || (ch == '/' && matches!(chars.get(i + 1), Some('/') | Some('*'))) {
                    break;
                }
                word.push(ch);
                i += 1;
                column += 1;
            }
            tokens.push(Token {
                tok: Tok::Word(word),
                line,
                column: start_column,
            });
        }
    }
    Ok(tokens)
}

struct VariableDecl {
    name: String,
    states: Vec<String>,
    line: usize,
}

enum Entry {
    Table(Vec<f64>),
    Default(Vec<f64>),
    Row(Vec<String>, Vec<f64>),
}

struct ProbabilityDecl {
    child: String,
    parents: Vec<String>,
    entries: Vec<Entry>,
    line: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn location(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.location();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Result<Token> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.error("unexpected end of input"),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(x), .. }) if x == w)
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        if self.is_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected `{c}`"))
        }
    }

    fn expect_word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Token {
                tok: Tok::Word(w), ..
            }) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.error("expected a name"),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let (line, column) = self.location();
        let word = self.expect_word()?;
        word.parse::<f64>().map_err(|_| Error::Syntax {
            line,
            column,
            message: format!("expected a number, found `{word}`"),
        })
    }

    /// Numbers separated by commas and/or whitespace, up to `;`.
    fn numbers_until_semicolon(&mut self) -> Result<Vec<f64>> {
        let mut values = Vec::new();
        while !self.is_punct(';') {
            if self.is_punct(',') {
                self.pos += 1;
                continue;
            }
            values.push(self.number()?);
        }
        self.expect_punct(';')?;
        Ok(values)
    }

    fn skip_statement(&mut self) -> Result<()> {
        while !self.is_punct(';') {
            self.next()?;
        }
        self.pos += 1;
        Ok(())
    }

    /// Skips a balanced `{ ... }` block whose opening brace was consumed.
    fn skip_block_body(&mut self) -> Result<()> {
        let mut depth = 1;
        while depth > 0 {
            match self.next()?.tok {
                Tok::Punct('{') => depth += 1,
                Tok::Punct('}') => depth -= 1,
                _ => {}
            }
        }
        Ok(())
    }

    fn names_until(&mut self, close: char) -> Result<Vec<String>> {
        let mut names = Vec::new();
        while !self.is_punct(close) {
            if self.is_punct(',') {
                self.pos += 1;
                continue;
            }
            names.push(self.expect_word()?);
        }
        self.expect_punct(close)?;
        Ok(names)
    }

    fn variable(&mut self) -> Result<VariableDecl> {
        let line = self.location().0;
        let name = self.expect_word()?;
        self.expect_punct('{')?;
        let mut states = None;
        while !self.is_punct('}') {
            if self.is_word("type") {
                let type_line = self.location().0;
                self.pos += 1;
                let kind = self.expect_word()?;
                if kind != "discrete" {
                    return Err(Error::Unsupported {
                        line: type_line,
                        message: format!("variable `{name}` has type `{kind}`; only discrete variables are supported"),
                    });
                }
                self.expect_punct('[')?;
                let (count_line, count_column) = self.location();
                let count_word = self.expect_word()?;
                let count: usize = count_word.parse().map_err(|_| Error::Syntax {
                    line: count_line,
                    column: count_column,
                    message: format!("expected a state count, found `{count_word}`"),
                })?;
                self.expect_punct(']')?;
                self.expect_punct('{')?;
                let names = self.names_until('}')?;
                if names.len() != count {
                    return Err(Error::Syntax {
                        line: count_line,
                        column: count_column,
                        message: format!(
                            "variable `{name}` declares {count} states but lists {}",
                            names.len()
                        ),
                    });
                }
                self.expect_punct(';')?;
                states = Some(names);
            } else if self.is_word("property") {
                self.skip_statement()?;
            } else {
                return self.error("expected `type` or `property` in variable block");
            }
        }
        self.expect_punct('}')?;
        let states = match states {
            Some(s) => s,
            None => {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: format!("variable `{name}` has no type declaration"),
                })
            }
        };
        Ok(VariableDecl { name, states, line })
    }

    fn probability(&mut self) -> Result<ProbabilityDecl> {
        let line = self.location().0;
        self.expect_punct('(')?;
        let child = self.expect_word()?;
        let mut parents = Vec::new();
        if self.is_punct('|') {
            self.pos += 1;
            parents = self.names_until(')')?;
        } else {
            self.expect_punct(')')?;
        }
        self.expect_punct('{')?;
        let mut entries = Vec::new();
        while !self.is_punct('}') {
            if self.is_word("table") {
                self.pos += 1;
                entries.push(Entry::Table(self.numbers_until_semicolon()?));
            } else if self.is_word("default") {
                self.pos += 1;
                entries.push(Entry::Default(self.numbers_until_semicolon()?));
            } else if self.is_word("property") {
                self.skip_statement()?;
            } else if self.is_punct('(') {
                self.pos += 1;
                let states = self.names_until(')')?;
                entries.push(Entry::Row(states, self.numbers_until_semicolon()?));
            } else {
                return self.error("expected `table`, `default` or a conditional row");
            }
        }
        self.expect_punct('}')?;
        Ok(ProbabilityDecl {
            child,
            parents,
            entries,
            line,
        })
    }
}

pub fn parse_bif_subset(text: &str) -> Result<Network> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    if parser.tokens.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "empty document".into(),
        });
    }
    let mut name = String::from("unknown");
    let mut decls = Vec::new();
    let mut probs = Vec::new();
    while parser.peek().is_some() {
        let (line, _) = parser.location();
        let keyword = parser.expect_word()?;
        match keyword.as_str() {
            "network" => {
                name = parser.expect_word()?;
                parser.expect_punct('{')?;
                parser.skip_block_body()?;
            }
            "variable" => decls.push(parser.variable()?),
            "probability" => probs.push(parser.probability()?),
            other => {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: format!("unexpected `{other}`; expected network, variable or probability"),
                })
            }
        }
    }
    assemble(name, decls, probs)
}

fn assemble(name: String, decls: Vec<VariableDecl>, probs: Vec<ProbabilityDecl>) -> Result<Network> {
    let mut ids = HashMap::new();
    for (i, d) in decls.iter().enumerate() {
        if ids.insert(d.name.as_str(), i).is_some() {
            return Err(Error::InvalidNetwork(format!(
                "variable `{}` declared twice (line {})",
                d.name, d.line
            )));
        }
    }
    let lookup = |name: &str, line: usize| {
        ids.get(name).copied().ok_or_else(|| {
            Error::InvalidNetwork(format!("unknown variable `{name}` at line {line}"))
        })
    };
    let mut by_child: Vec<Option<&ProbabilityDecl>> = vec![None; decls.len()];
    for p in &probs {
        let child = lookup(&p.child, p.line)?;
        if by_child[child].replace(p).is_some() {
            return Err(Error::InvalidNetwork(format!(
                "variable `{}` has two probability blocks (line {})",
                p.child, p.line
            )));
        }
    }

    let mut variables = Vec::with_capacity(decls.len());
    let mut cpts = Vec::with_capacity(decls.len());
    for (i, decl) in decls.iter().enumerate() {
        let prob = by_child[i].ok_or_else(|| {
            Error::InvalidNetwork(format!("variable `{}` has no probability block", decl.name))
        })?;
        let parents = prob
            .parents
            .iter()
            .map(|p| lookup(p, prob.line))
            .collect::<Result<Vec<_>>>()?;
        let card = decl.states.len();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| decls[p].states.len()).collect();
        let columns: usize = parent_cards.iter().product();
        let mut values = vec![0.0; columns * card];
        let mut covered = vec![false; columns];
        let wrong_len = |got: usize, expected: usize| {
            Error::InvalidNetwork(format!(
                "probability block of `{}` (line {}) has {got} values where {expected} are needed",
                decl.name, prob.line
            ))
        };
        let mut default = None;
        for entry in &prob.entries {
            match entry {
                Entry::Table(table) => {
                    if table.len() != columns * card {
                        return Err(wrong_len(table.len(), columns * card));
                    }
                    for s in 0..card {
                        for c in 0..columns {
                            values[c * card + s] = table[s * columns + c];
                        }
                    }
                    covered.fill(true);
                }
                Entry::Default(column) => {
                    if column.len() != card {
                        return Err(wrong_len(column.len(), card));
                    }
                    default = Some(column);
                }
                Entry::Row(states, column) => {
                    if states.len() != parents.len() {
                        return Err(Error::InvalidNetwork(format!(
                            "row of `{}` (line {}) names {} parent states, expected {}",
                            decl.name,
                            prob.line,
                            states.len(),
                            parents.len()
                        )));
                    }
                    if column.len() != card {
                        return Err(wrong_len(column.len(), card));
                    }
                    let mut config = 0;
                    for ((state, &p), &pc) in states.iter().zip(&parents).zip(&parent_cards) {
                        let s = decls[p].states.iter().position(|x| x == state).ok_or_else(|| {
                            Error::InvalidNetwork(format!(
                                "unknown state `{state}` of `{}` in block of `{}` (line {})",
                                decls[p].name, decl.name, prob.line
                            ))
                        })?;
                        config = config * pc + s;
                    }
                    values[config * card..(config + 1) * card].copy_from_slice(column);
                    covered[config] = true;
                }
            }
        }
        for c in 0..columns {
            if !covered[c] {
                match default {
                    Some(column) => values[c * card..(c + 1) * card].copy_from_slice(column),
                    None => {
                        return Err(Error::InvalidNetwork(format!(
                            "probability block of `{}` (line {}) misses parent configuration {c}",
                            decl.name, prob.line
                        )))
                    }
                }
            }
        }
        variables.push(Variable::new(i, decl.name.clone(), decl.states.clone(), parents.clone()));
        cpts.push(Cpt::new(i, parents, card, values));
    }
    Network::with_tolerance(name, variables, cpts, BIF_NORMALIZATION_TOLERANCE)
}
