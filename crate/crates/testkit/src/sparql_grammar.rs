//! Recognizer for SPARQL 1.1 SELECT queries, following the W3C grammar
//! productions (Query, Prologue, SelectQuery, GroupGraphPattern and the
//! expression hierarchy). It also enforces two non-syntactic rules: every
//! prefix must be declared, and a grouped query may only project grouped
//! variables. Property paths, CONSTRUCT/ASK/DESCRIBE and updates are
//! rejected.

use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq)]
enum T {
    IriRef(String),
    PName(String, String),
    Var(String),
    Str,
    Num,
    Word(String),
    BNode,
    Sym(&'static str),
}

fn lex(s: &str) -> Result<Vec<T>, String> {
    let c: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    const SYMS: [&str; 20] = [
        "^^", "&&", "||", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ".", ",", ";", "*", "+",
        "-", "/", "=",
    ];
    while i < c.len() {
        let ch = c[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch == '#' {
            while i < c.len() && c[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ch == '<' {
            // IRIREF or the '<' operator
            let mut j = i + 1;
            let mut ok = false;
            while j < c.len() {
                let d = c[j];
                if d == '>' {
                    ok = true;
                    break;
                }
                if d.is_whitespace() || "<\"{}|^`\\".contains(d) {
                    break;
                }
                j += 1;
            }
            if ok {
                out.push(T::IriRef(c[i + 1..j].iter().collect()));
                i = j + 1;
            } else {
                if c.get(i + 1) == Some(&'=') {
                    out.push(T::Sym("<="));
                    i += 2;
                } else {
                    out.push(T::Sym("<"));
                    i += 1;
                }
            }
            continue;
        }
        if ch == '>' {
            if c.get(i + 1) == Some(&'=') {
                out.push(T::Sym(">="));
                i += 2;
            } else {
                out.push(T::Sym(">"));
                i += 1;
            }
            continue;
        }
        if ch == '!' {
            if c.get(i + 1) == Some(&'=') {
                out.push(T::Sym("!="));
                i += 2;
            } else {
                out.push(T::Sym("!"));
                i += 1;
            }
            continue;
        }
        if ch == '?' || ch == '$' {
            let mut j = i + 1;
            while j < c.len() && (c[j].is_alphanumeric() || c[j] == '_') {
                j += 1;
            }
            if j == i + 1 {
                return Err(format!("empty variable at {i}"));
            }
            out.push(T::Var(c[i + 1..j].iter().collect()));
            i = j;
            continue;
        }
        if ch == '"' || ch == '\'' {
            let mut j = i + 1;
            while j < c.len() && c[j] != ch {
                if c[j] == '\\' {
                    j += 1;
                }
                if c[j] == '\n' {
                    return Err("newline in string".into());
                }
                j += 1;
            }
            if j >= c.len() {
                return Err("unterminated string".into());
            }
            i = j + 1;
            if c.get(i) == Some(&'@') {
                i += 1;
                while i < c.len() && (c[i].is_ascii_alphanumeric() || c[i] == '-') {
                    i += 1;
                }
            }
            out.push(T::Str);
            continue;
        }
        if ch.is_ascii_digit() {
            while i < c.len()
                && (c[i].is_ascii_digit()
                    || c[i] == '.' && c.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
            {
                i += 1;
            }
            out.push(T::Num);
            continue;
        }
        if ch == '_' && c.get(i + 1) == Some(&':') {
            i += 2;
            while i < c.len() && (c[i].is_alphanumeric() || c[i] == '_' || c[i] == '-') {
                i += 1;
            }
            out.push(T::BNode);
            continue;
        }
        if ch.is_alphabetic() || ch == ':' {
            let mut j = i;
            while j < c.len() && (c[j].is_alphanumeric() || c[j] == '_' || c[j] == '-') {
                j += 1;
            }
            if c.get(j) == Some(&':') {
                let prefix: String = c[i..j].iter().collect();
                let mut k = j + 1;
                while k < c.len()
                    && (c[k].is_alphanumeric()
                        || "_-".contains(c[k])
                        || c[k] == '.' && c.get(k + 1).is_some_and(|d| d.is_alphanumeric()))
                {
                    k += 1;
                }
                out.push(T::PName(prefix, c[j + 1..k].iter().collect()));
                i = k;
            } else {
                out.push(T::Word(c[i..j].iter().collect()));
                i = j;
            }
            continue;
        }
        match SYMS
            .iter()
            .find(|s| c[i..].starts_with(&s.chars().collect::<Vec<_>>()))
        {
            Some(s) => {
                out.push(T::Sym(s));
                i += s.chars().count();
            }
            None => return Err(format!("unexpected character {ch:?} at {i}")),
        }
    }
    Ok(out)
}

struct P {
    t: Vec<T>,
    i: usize,
    prefixes: BTreeSet<String>,
}

type R<X = ()> = Result<X, String>;

const BUILTINS: [&str; 43] = [
    "STR",
    "LANG",
    "LANGMATCHES",
    "DATATYPE",
    "BOUND",
    "IRI",
    "URI",
    "BNODE",
    "RAND",
    "ABS",
    "CEIL",
    "FLOOR",
    "ROUND",
    "CONCAT",
    "STRLEN",
    "UCASE",
    "LCASE",
    "ENCODE_FOR_URI",
    "CONTAINS",
    "STRSTARTS",
    "STRENDS",
    "STRBEFORE",
    "STRAFTER",
    "YEAR",
    "MONTH",
    "DAY",
    "HOURS",
    "MINUTES",
    "SECONDS",
    "TIMEZONE",
    "TZ",
    "NOW",
    "MD5",
    "SHA1",
    "SHA256",
    "COALESCE",
    "IF",
    "STRLANG",
    "STRDT",
    "SAMETERM",
    "ISIRI",
    "ISBLANK",
    "ISLITERAL",
];
const AGGREGATES: [&str; 7] = [
    "COUNT",
    "SUM",
    "MIN",
    "MAX",
    "AVG",
    "SAMPLE",
    "GROUP_CONCAT",
];

impl P {
    fn peek(&self) -> Option<&T> {
        self.t.get(self.i)
    }
    fn peek_at(&self, k: usize) -> Option<&T> {
        self.t.get(self.i + k)
    }
    fn kw(&self, w: &str) -> bool {
        matches!(self.peek(), Some(T::Word(x)) if x.eq_ignore_ascii_case(w))
    }
    fn eat_kw(&mut self, w: &str) -> bool {
        let hit = self.kw(w);
        if hit {
            self.i += 1;
        }
        hit
    }
    fn want_kw(&mut self, w: &str) -> R {
        if self.eat_kw(w) {
            Ok(())
        } else {
            Err(format!(
                "expected {w} at token {}, found {:?}",
                self.i,
                self.peek()
            ))
        }
    }
    fn sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(T::Sym(x)) if *x == s)
    }
    fn eat(&mut self, s: &str) -> bool {
        let hit = self.sym(s);
        if hit {
            self.i += 1;
        }
        hit
    }
    fn want(&mut self, s: &str) -> R {
        if self.eat(s) {
            Ok(())
        } else {
            Err(format!(
                "expected '{s}' at token {}, found {:?}",
                self.i,
                self.peek()
            ))
        }
    }

    fn pname(&mut self) -> R {
        if let Some(T::PName(p, _)) = self.peek() {
            if !self.prefixes.contains(p) {
                return Err(format!("undeclared prefix {p}:"));
            }
            self.i += 1;
            Ok(())
        } else {
            Err("expected a prefixed name".into())
        }
    }

    fn is_iri(&self) -> bool {
        matches!(self.peek(), Some(T::IriRef(_) | T::PName(..)))
    }

    fn iri(&mut self) -> R {
        match self.peek() {
            Some(T::IriRef(_)) => {
                self.i += 1;
                Ok(())
            }
            Some(T::PName(..)) => self.pname(),
            other => Err(format!("expected an IRI, found {other:?}")),
        }
    }

    // [1] QueryUnit, [2] Query, [4] Prologue
    fn query(&mut self) -> R {
        loop {
            if self.eat_kw("BASE") {
                match self.peek() {
                    Some(T::IriRef(_)) => self.i += 1,
                    _ => return Err("BASE needs an IRIREF".into()),
                }
            } else if self.eat_kw("PREFIX") {
                let Some(T::PName(p, l)) = self.peek().cloned() else {
                    return Err("PREFIX needs PNAME_NS".into());
                };
                if !l.is_empty() {
                    return Err("PNAME_NS must end with ':'".into());
                }
                self.i += 1;
                match self.peek() {
                    Some(T::IriRef(_)) => self.i += 1,
                    _ => return Err("PREFIX needs an IRIREF".into()),
                }
                self.prefixes.insert(p);
            } else {
                break;
            }
        }
        self.select_query()?;
        self.values_clause()?;
        if self.i != self.t.len() {
            return Err(format!(
                "trailing tokens from {}: {:?}",
                self.i,
                self.peek()
            ));
        }
        Ok(())
    }

    // [7] SelectQuery
    fn select_query(&mut self) -> R {
        let projected = self.select_clause()?;
        while self.eat_kw("FROM") {
            self.eat_kw("NAMED");
            self.iri()?;
        }
        self.eat_kw("WHERE");
        self.group_graph_pattern()?;
        self.solution_modifier(&projected)
    }

    // [9] SelectClause; returns (plain projected vars, has aggregate)
    fn select_clause(&mut self) -> R<(Vec<String>, bool)> {
        self.want_kw("SELECT")?;
        if !self.eat_kw("DISTINCT") {
            self.eat_kw("REDUCED");
        }
        let mut vars = Vec::new();
        let mut aggregate = false;
        if self.eat("*") {
            return Ok((vars, false));
        }
        loop {
            match self.peek() {
                Some(T::Var(v)) => {
                    vars.push(v.clone());
                    self.i += 1;
                }
                Some(T::Sym("(")) => {
                    self.i += 1;
                    aggregate |= self.expression()?;
                    self.want_kw("AS")?;
                    match self.peek() {
                        Some(T::Var(_)) => self.i += 1,
                        _ => return Err("AS needs a variable".into()),
                    }
                    self.want(")")?;
                }
                _ => break,
            }
        }
        if vars.is_empty() && !aggregate && !self.sym(")") && self.i > 0 {
            // projection list may not be empty
            if !matches!(self.t.get(self.i - 1), Some(T::Sym(")"))) {
                return Err("empty projection".into());
            }
        }
        Ok((vars, aggregate))
    }

    // [53] GroupGraphPattern
    fn group_graph_pattern(&mut self) -> R {
        self.want("{")?;
        if self.kw("SELECT") {
            let projected = self.select_clause()?;
            self.eat_kw("WHERE");
            self.group_graph_pattern()?;
            self.solution_modifier(&projected)?;
            self.values_clause()?;
        } else {
            // [54] GroupGraphPatternSub
            self.triples_block_opt()?;
            while self.graph_pattern_not_triples()? {
                self.eat(".");
                self.triples_block_opt()?;
            }
        }
        self.want("}")
    }

    fn starts_triple(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                T::Var(_)
                    | T::IriRef(_)
                    | T::PName(..)
                    | T::Str
                    | T::Num
                    | T::BNode
                    | T::Sym("[")
                    | T::Sym("(")
            )
        ) || self.kw("true")
            || self.kw("false")
    }

    // [55] TriplesBlock
    fn triples_block_opt(&mut self) -> R {
        while self.starts_triple() {
            self.triples_same_subject()?;
            if !self.eat(".") {
                break;
            }
        }
        Ok(())
    }

    // [75] TriplesSameSubject
    fn triples_same_subject(&mut self) -> R {
        if self.sym("[") || self.sym("(") {
            return Err("blank node property lists and collections are not supported".into());
        }
        self.var_or_term()?;
        self.property_list_not_empty()
    }

    // [77] PropertyListNotEmpty
    fn property_list_not_empty(&mut self) -> R {
        loop {
            self.verb()?;
            loop {
                self.var_or_term()?;
                if !self.eat(",") {
                    break;
                }
            }
            if !self.eat(";") {
                return Ok(());
            }
            while self.eat(";") {}
            if !(self.is_iri() || matches!(self.peek(), Some(T::Var(_))) || self.kw("a")) {
                return Ok(());
            }
        }
    }

    // [78] Verb
    fn verb(&mut self) -> R {
        if self.eat_kw("a") {
            return Ok(());
        }
        if matches!(self.peek(), Some(T::Var(_))) {
            self.i += 1;
            return Ok(());
        }
        self.iri()?;
        if self.sym("/") || self.sym("|") || self.sym("*") || self.sym("+") || self.sym("?") {
            return Err("property paths are not supported".into());
        }
        Ok(())
    }

    // [106] VarOrTerm
    fn var_or_term(&mut self) -> R {
        match self.peek() {
            Some(T::Var(_) | T::BNode | T::Num | T::IriRef(_)) => {
                self.i += 1;
                Ok(())
            }
            Some(T::PName(..)) => self.pname(),
            Some(T::Str) => {
                self.i += 1;
                if self.eat("^^") {
                    self.iri()?;
                }
                Ok(())
            }
            Some(T::Word(w)) if w == "true" || w == "false" => {
                self.i += 1;
                Ok(())
            }
            other => Err(format!("expected a term, found {other:?}")),
        }
    }

    // [56] GraphPatternNotTriples; false when none starts here
    fn graph_pattern_not_triples(&mut self) -> R<bool> {
        if self.sym("{") {
            // [67] GroupOrUnionGraphPattern
            self.group_graph_pattern()?;
            while self.eat_kw("UNION") {
                self.group_graph_pattern()?;
            }
        } else if self.eat_kw("OPTIONAL") || self.eat_kw("MINUS") {
            self.group_graph_pattern()?;
        } else if self.eat_kw("GRAPH") {
            if matches!(self.peek(), Some(T::Var(_))) {
                self.i += 1;
            } else {
                self.iri()?;
            }
            self.group_graph_pattern()?;
        } else if self.eat_kw("FILTER") {
            self.constraint()?;
        } else if self.eat_kw("BIND") {
            self.want("(")?;
            self.expression()?;
            self.want_kw("AS")?;
            match self.peek() {
                Some(T::Var(_)) => self.i += 1,
                _ => return Err("BIND needs a variable".into()),
            }
            self.want(")")?;
        } else if self.kw("VALUES") {
            self.values_clause()?;
        } else {
            return Ok(false);
        }
        Ok(true)
    }

    // [28] ValuesClause / [61] InlineData (single-variable and full forms)
    fn values_clause(&mut self) -> R {
        if !self.eat_kw("VALUES") {
            return Ok(());
        }
        let mut width = None;
        if matches!(self.peek(), Some(T::Var(_))) {
            self.i += 1;
        } else {
            self.want("(")?;
            let mut n = 0;
            while matches!(self.peek(), Some(T::Var(_))) {
                self.i += 1;
                n += 1;
            }
            self.want(")")?;
            width = Some(n);
        }
        self.want("{")?;
        while !self.eat("}") {
            match width {
                None => self.data_value()?,
                Some(n) => {
                    self.want("(")?;
                    for _ in 0..n {
                        self.data_value()?;
                    }
                    self.want(")")?;
                }
            }
        }
        Ok(())
    }

    fn data_value(&mut self) -> R {
        if self.eat_kw("UNDEF") {
            return Ok(());
        }
        match self.peek() {
            Some(T::Var(_) | T::BNode) => Err("VALUES data must be constants".into()),
            _ => self.var_or_term(),
        }
    }

    // [69] Constraint
    fn constraint(&mut self) -> R {
        if self.sym("(") {
            self.i += 1;
            self.expression()?;
            return self.want(")");
        }
        if self.is_builtin_start() {
            self.primary()?;
            return Ok(());
        }
        self.iri()?;
        self.arg_list()
    }

    fn is_builtin_start(&self) -> bool {
        match self.peek() {
            Some(T::Word(w)) => {
                let u = w.to_ascii_uppercase();
                BUILTINS.contains(&u.as_str())
                    || AGGREGATES.contains(&u.as_str())
                    || [
                        "EXISTS",
                        "NOT",
                        "REGEX",
                        "SUBSTR",
                        "REPLACE",
                        "ISURI",
                        "ISNUMERIC",
                        "UUID",
                        "STRUUID",
                        "SHA384",
                        "SHA512",
                    ]
                    .contains(&u.as_str())
            }
            _ => false,
        }
    }

    fn arg_list(&mut self) -> R {
        self.want("(")?;
        if self.eat(")") {
            return Ok(());
        }
        self.eat_kw("DISTINCT");
        loop {
            self.expression()?;
            if !self.eat(",") {
                break;
            }
        }
        self.want(")")
    }

    // [110] Expression and the operator hierarchy; returns whether an
    // aggregate occurred.
    fn expression(&mut self) -> R<bool> {
        let mut agg = self.and_expr()?;
        while self.eat("||") {
            agg |= self.and_expr()?;
        }
        Ok(agg)
    }

    fn and_expr(&mut self) -> R<bool> {
        let mut agg = self.relational()?;
        while self.eat("&&") {
            agg |= self.relational()?;
        }
        Ok(agg)
    }

    fn relational(&mut self) -> R<bool> {
        let mut agg = self.additive()?;
        if ["=", "!=", "<", ">", "<=", ">="]
            .iter()
            .any(|s| self.sym(s))
        {
            self.i += 1;
            agg |= self.additive()?;
        } else if self.kw("IN")
            || (self.kw("NOT")
                && matches!(self.peek_at(1), Some(T::Word(w)) if w.eq_ignore_ascii_case("IN")))
        {
            self.eat_kw("NOT");
            self.want_kw("IN")?;
            self.arg_list()?;
        }
        Ok(agg)
    }

    fn additive(&mut self) -> R<bool> {
        let mut agg = self.multiplicative()?;
        while self.sym("+") || self.sym("-") {
            self.i += 1;
            agg |= self.multiplicative()?;
        }
        Ok(agg)
    }

    fn multiplicative(&mut self) -> R<bool> {
        let mut agg = self.unary()?;
        while self.sym("*") || self.sym("/") {
            self.i += 1;
            agg |= self.unary()?;
        }
        Ok(agg)
    }

    fn unary(&mut self) -> R<bool> {
        if self.eat("!") || self.eat("+") || self.eat("-") {
            return self.primary();
        }
        self.primary()
    }

    // [119] PrimaryExpression
    fn primary(&mut self) -> R<bool> {
        if self.eat("(") {
            let agg = self.expression()?;
            self.want(")")?;
            return Ok(agg);
        }
        if let Some(T::Word(w)) = self.peek().cloned() {
            let u = w.to_ascii_uppercase();
            if u == "TRUE" || u == "FALSE" {
                self.i += 1;
                return Ok(false);
            }
            if u == "NOT" {
                self.i += 1;
                self.want_kw("EXISTS")?;
                self.group_graph_pattern()?;
                return Ok(false);
            }
            if u == "EXISTS" {
                self.i += 1;
                self.group_graph_pattern()?;
                return Ok(false);
            }
            if AGGREGATES.contains(&u.as_str()) {
                // [127] Aggregate
                self.i += 1;
                self.want("(")?;
                self.eat_kw("DISTINCT");
                if u == "COUNT" && self.eat("*") {
                } else {
                    self.expression()?;
                }
                if u == "GROUP_CONCAT" && self.eat(";") {
                    self.want_kw("SEPARATOR")?;
                    self.want("=")?;
                    if self.peek() != Some(&T::Str) {
                        return Err("SEPARATOR needs a string".into());
                    }
                    self.i += 1;
                }
                self.want(")")?;
                return Ok(true);
            }
            if self.is_builtin_start() {
                self.i += 1;
                if ["RAND", "NOW", "UUID", "STRUUID"].contains(&u.as_str()) {
                    self.want("(")?;
                    self.want(")")?;
                } else if u == "BNODE"
                    && self.sym("(")
                    && matches!(self.peek_at(1), Some(T::Sym(")")))
                {
                    self.i += 2;
                } else {
                    self.arg_list()?;
                }
                return Ok(false);
            }
            return Err(format!("unexpected word {w}"));
        }
        match self.peek() {
            Some(T::Var(_) | T::Num) => {
                self.i += 1;
                Ok(false)
            }
            Some(T::Str) => {
                self.i += 1;
                if self.eat("^^") {
                    self.iri()?;
                }
                Ok(false)
            }
            Some(T::IriRef(_) | T::PName(..)) => {
                self.iri()?;
                if self.sym("(") {
                    self.arg_list()?;
                }
                Ok(false)
            }
            other => Err(format!("expected an expression, found {other:?}")),
        }
    }

    // [18] SolutionModifier
    fn solution_modifier(&mut self, projected: &(Vec<String>, bool)) -> R {
        let mut grouped: Option<BTreeSet<String>> = None;
        if self.eat_kw("GROUP") {
            self.want_kw("BY")?;
            let mut keys = BTreeSet::new();
            loop {
                match self.peek() {
                    Some(T::Var(v)) => {
                        keys.insert(v.clone());
                        self.i += 1;
                    }
                    Some(T::Sym("(")) => {
                        self.i += 1;
                        self.expression()?;
                        if self.eat_kw("AS") {
                            if let Some(T::Var(v)) = self.peek().cloned() {
                                keys.insert(v);
                                self.i += 1;
                            }
                        }
                        self.want(")")?;
                    }
                    _ if self.is_builtin_start() || self.is_iri() => {
                        self.constraint()?;
                    }
                    _ => break,
                }
            }
            if keys.is_empty() && !self.kw("HAVING") {
                // GROUP BY must list at least one condition
                if !matches!(self.t.get(self.i - 1), Some(T::Sym(")"))) {
                    return Err("empty GROUP BY".into());
                }
            }
            grouped = Some(keys);
        }
        if self.eat_kw("HAVING") {
            loop {
                self.constraint()?;
                if !(self.sym("(") || self.is_builtin_start() || self.is_iri()) {
                    break;
                }
            }
            grouped.get_or_insert_with(BTreeSet::new);
        }
        if self.eat_kw("ORDER") {
            self.want_kw("BY")?;
            loop {
                if self.eat_kw("ASC") || self.eat_kw("DESC") {
                    self.want("(")?;
                    self.expression()?;
                    self.want(")")?;
                } else if matches!(self.peek(), Some(T::Var(_))) {
                    self.i += 1;
                } else if self.sym("(") || self.is_builtin_start() || self.is_iri() {
                    self.constraint()?;
                } else {
                    break;
                }
            }
        }
        for _ in 0..2 {
            if self.eat_kw("LIMIT") || self.eat_kw("OFFSET") {
                if self.peek() != Some(&T::Num) {
                    return Err("LIMIT/OFFSET need an integer".into());
                }
                self.i += 1;
            }
        }
        let aggregate_query = grouped.is_some() || projected.1;
        if aggregate_query {
            let keys = grouped.unwrap_or_default();
            if let Some(v) = projected.0.iter().find(|v| !keys.contains(*v)) {
                return Err(format!("?{v} is projected but not grouped"));
            }
        }
        Ok(())
    }
}

/// Accepts exactly the SELECT queries the SPARQL 1.1 grammar accepts
/// (within the supported subset); the error explains the first problem.
pub fn validate(query: &str) -> Result<(), String> {
    let t = lex(query)?;
    P {
        t,
        i: 0,
        prefixes: BTreeSet::new(),
    }
    .query()
}
