//! Text forms for groups and subsets.
//!
//! Groups are written `Z6` or `Z2xZ2xZ3` (case-insensitive). Subsets are
//! written `{0,3,5}` with flat indices, or `{(1,0),(0,2)}` with one residue
//! per cyclic factor.

use kneser_core::{Error, Group, GroupElement, GroupSpec, GroupSubset, Result};

fn parse_err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

struct Cursor {
    chars: Vec<(usize, char)>,
    at: usize,
    len: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor {
            chars: src.char_indices().collect(),
            at: 0,
            len: src.len(),
        }
    }

    fn pos(&self) -> usize {
        self.chars.get(self.at).map_or(self.len, |&(p, _)| p)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn bump(&mut self) {
        self.at += 1;
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let start = self.pos();
        let mut value: usize = 0;
        let mut digits = 0;
        while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(d as usize))
                .ok_or_else(|| parse_err(start, format!("{what} does not fit in usize")))?;
            digits += 1;
            self.bump();
        }
        if digits == 0 {
            return Err(parse_err(start, format!("expected {what}")));
        }
        Ok(value)
    }

    fn end(&mut self) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(parse_err(self.pos(), format!("unexpected '{c}' after input"))),
        }
    }
}

pub fn parse_group(text: &str) -> Result<GroupSpec> {
    let mut cur = Cursor::new(text);
    let mut orders = Vec::new();
    loop {
        cur.skip_ws();
        if !(cur.eat('Z') || cur.eat('z')) {
            return Err(parse_err(cur.pos(), "expected 'Z'"));
        }
        orders.push(cur.number("a cyclic order")?);
        cur.skip_ws();
        if cur.peek().is_none() {
            break;
        }
        if !(cur.eat('x') || cur.eat('X')) {
            return Err(parse_err(cur.pos(), "expected 'x' or end of input"));
        }
    }
    GroupSpec::new(orders)
}

fn element(cur: &mut Cursor, group: &Group) -> Result<usize> {
    if cur.eat('(') {
        let mut coords = Vec::new();
        loop {
            cur.skip_ws();
            coords.push(cur.number("a residue")?);
            cur.skip_ws();
            if cur.eat(')') {
                break;
            }
            if !cur.eat(',') {
                return Err(parse_err(cur.pos(), "expected ',' or ')'"));
            }
        }
        let orders = group.spec().map(GroupSpec::orders).unwrap_or(&[]);
        if coords.len() != orders.len() {
            return Err(Error::RankMismatch {
                got: coords.len(),
                rank: group.rank(),
            });
        }
        if let Some((&c, &n)) = coords.iter().zip(orders).find(|(&c, &n)| c >= n) {
            return Err(Error::IndexOutOfRange { index: c, order: n });
        }
        group.index(&GroupElement::new(coords))
    } else {
        let x = cur.number("an element")?;
        if x >= group.order() {
            return Err(Error::IndexOutOfRange {
                index: x,
                order: group.order(),
            });
        }
        Ok(x)
    }
}

pub fn parse_set(text: &str, group: &Group) -> Result<GroupSubset> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if !cur.eat('{') {
        return Err(parse_err(cur.pos(), "expected '{'"));
    }
    let mut members = Vec::new();
    cur.skip_ws();
    if !cur.eat('}') {
        loop {
            cur.skip_ws();
            members.push(element(&mut cur, group)?);
            cur.skip_ws();
            if cur.eat('}') {
                break;
            }
            if !cur.eat(',') {
                return Err(parse_err(cur.pos(), "expected ',' or '}'"));
            }
        }
    }
    cur.end()?;
    GroupSubset::from_indices(group, members)
}

pub fn render_element(group: &Group, x: usize) -> String {
    if group.rank() >= 2 {
        let coords: Vec<String> = group.unindex(x).coords.iter().map(usize::to_string).collect();
        format!("({})", coords.join(","))
    } else {
        x.to_string()
    }
}

pub fn render_set(group: &Group, set: &GroupSubset) -> String {
    let parts: Vec<String> = set.iter().map(|x| render_element(group, x)).collect();
    format!("{{{}}}", parts.join(","))
}
