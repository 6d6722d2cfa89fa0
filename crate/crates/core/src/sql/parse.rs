use super::ast::*;
use super::lex::{tokenize, Tok, Token};
use super::{SqlAst, SqlError};

const AGGREGATES: &[&str] = &["count", "sum", "avg", "min", "max"];

/// Parse one SELECT-family query.
pub fn parse_sql(text: &str) -> std::result::Result<SqlAst, SqlError> {
    let toks = tokenize(text)?;
    let mut p = Parser { src: text, toks, i: 0 };
    if p.toks.is_empty() {
        return Err(SqlError::syntax(text, 0, "empty query"));
    }
    let query = p.query()?;
    p.eat_sym(";");
    if let Some(t) = p.toks.get(p.i) {
        return Err(SqlError::syntax(text, t.pos, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(SqlAst { query })
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident { text, .. } => format!("`{text}`"),
        Tok::Number(n) => format!("number {n}"),
        Tok::Str { value, quote } => format!("string {quote}{value}{quote}"),
        Tok::Sym(s) => format!("`{s}`"),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    i: usize,
}

type Result<T> = std::result::Result<T, SqlError>;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.i + n).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.src.len(), |t| t.pos)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let message = message.into();
        let found = match self.toks.get(self.i) {
            Some(t) => format!("{message}, found {}", describe(&t.tok)),
            None => format!("{message}, found end of query"),
        };
        Err(SqlError::syntax(self.src, self.pos(), found))
    }

    fn is_kw_at(&self, n: usize, kw: &str) -> bool {
        matches!(self.peek_at(n), Some(Tok::Ident { text, quoted: false }) if text.eq_ignore_ascii_case(kw))
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.is_kw_at(0, kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        self.i += usize::from(hit);
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected {}", kw.to_uppercase()))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        self.i += usize::from(hit);
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    /// An identifier that is not a reserved word (quoted ones always are).
    fn name(&self) -> Option<String> {
        match self.peek() {
            Some(Tok::Ident { text, quoted }) if *quoted || !is_keyword(text) => Some(text.clone()),
            _ => None,
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String> {
        match self.name() {
            Some(n) => {
                self.i += 1;
                Ok(n)
            }
            None => self.error(format!("expected {what}")),
        }
    }

    fn starts_query(&self, n: usize) -> bool {
        self.is_kw_at(n, "select")
            || (matches!(self.peek_at(n), Some(Tok::Sym("("))) && self.starts_query(n + 1))
    }

    fn query(&mut self) -> Result<Query> {
        let body = self.set_expr()?;
        let mut order_by = Vec::new();
        if self.eat_kw("order") {
            self.expect_kw("by")?;
            loop {
                let expr = self.expr()?;
                let desc = if self.eat_kw("desc") {
                    Some(true)
                } else if self.eat_kw("asc") {
                    Some(false)
                } else {
                    None
                };
                order_by.push(OrderItem { expr, desc });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        let mut limit = None;
        let mut offset = None;
        if self.eat_kw("limit") {
            limit = Some(self.expr()?);
            if self.eat_kw("offset") {
                offset = Some(self.expr()?);
            } else if self.eat_sym(",") {
                // `LIMIT skip, count`
                let count = self.expr()?;
                offset = limit.replace(count);
            }
        }
        Ok(Query {
            body,
            order_by,
            limit,
            offset,
        })
    }

    fn set_expr(&mut self) -> Result<SetExpr> {
        let mut left = self.set_operand()?;
        loop {
            let op = if self.eat_kw("union") {
                SetOpKind::Union
            } else if self.eat_kw("intersect") {
                SetOpKind::Intersect
            } else if self.eat_kw("except") {
                SetOpKind::Except
            } else {
                return Ok(left);
            };
            let all = self.eat_kw("all");
            let right = self.set_operand()?;
            left = SetExpr::SetOp {
                op,
                all,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
    }

    fn set_operand(&mut self) -> Result<SetExpr> {
        if self.is_sym("(") && self.starts_query(1) {
            self.i += 1;
            let q = self.query()?;
            self.expect_sym(")")?;
            return Ok(SetExpr::Query(Box::new(q)));
        }
        Ok(SetExpr::Select(Box::new(self.select()?)))
    }

    fn select(&mut self) -> Result<Select> {
        self.expect_kw("select")?;
        let distinct = self.eat_kw("distinct");
        if !distinct {
            self.eat_kw("all");
        }
        let mut items = Vec::new();
        loop {
            items.push(self.select_item()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        let from = if self.eat_kw("from") { Some(self.from()?) } else { None };
        let where_ = if self.eat_kw("where") { Some(self.expr()?) } else { None };
        let mut group_by = Vec::new();
        if self.eat_kw("group") {
            self.expect_kw("by")?;
            group_by = self.expr_list()?;
        }
        let having = if self.eat_kw("having") { Some(self.expr()?) } else { None };
        Ok(Select {
            distinct,
            items,
            from,
            where_,
            group_by,
            having,
        })
    }

    fn select_item(&mut self) -> Result<SelectItem> {
        let pos = Pos(self.pos());
        if self.eat_sym("*") {
            return Ok(SelectItem {
                expr: Expr::Star { table: None, pos },
                alias: None,
            });
        }
        if self.name().is_some() && matches!(self.peek_at(1), Some(Tok::Sym("."))) && matches!(self.peek_at(2), Some(Tok::Sym("*"))) {
            let table = self.expect_name("table")?;
            self.i += 2;
            return Ok(SelectItem {
                expr: Expr::Star { table: Some(table), pos },
                alias: None,
            });
        }
        if self.is_kw("from") || self.peek().is_none() {
            return self.error("expected a select-list item");
        }
        let expr = self.expr()?;
        let alias = self.alias()?;
        Ok(SelectItem { expr, alias })
    }

    fn alias(&mut self) -> Result<Option<String>> {
        if self.eat_kw("as") {
            if let Some(Tok::Str { value, .. }) = self.peek() {
                let v = value.clone();
                self.i += 1;
                return Ok(Some(v));
            }
            return self.expect_name("alias").map(Some);
        }
        Ok(self.name().inspect(|_| self.i += 1))
    }

    fn from(&mut self) -> Result<From> {
        let first = self.factor()?;
        let mut joins = Vec::new();
        loop {
            let kind = if self.eat_sym(",") {
                JoinKind::Comma
            } else if self.eat_kw("join") {
                JoinKind::Inner
            } else if self.is_kw("inner") && self.is_kw_at(1, "join") {
                self.i += 2;
                JoinKind::Inner
            } else if self.is_kw("left") || self.is_kw("right") {
                let kind = if self.eat_kw("left") {
                    JoinKind::Left
                } else {
                    self.i += 1;
                    JoinKind::Right
                };
                self.eat_kw("outer");
                self.expect_kw("join")?;
                kind
            } else if self.is_kw("cross") {
                self.i += 1;
                self.expect_kw("join")?;
                JoinKind::Cross
            } else {
                break;
            };
            let factor = self.factor()?;
            let on = if kind != JoinKind::Comma && self.eat_kw("on") {
                Some(self.expr()?)
            } else {
                None
            };
            joins.push(Join { kind, factor, on });
        }
        Ok(From { first, joins })
    }

    fn factor(&mut self) -> Result<TableFactor> {
        if self.is_sym("(") && self.starts_query(1) {
            self.i += 1;
            let query = Box::new(self.query()?);
            self.expect_sym(")")?;
            let alias = self.alias()?;
            return Ok(TableFactor::Derived { query, alias });
        }
        let pos = Pos(self.pos());
        let name = self.expect_name("table name")?;
        let alias = self.alias()?;
        Ok(TableFactor::Table { name, alias, pos })
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut left = self.and()?;
        while self.eat_kw("or") {
            let right = self.and()?;
            left = binary(BinOp::Or, left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut left = self.not()?;
        while self.eat_kw("and") {
            let right = self.not()?;
            left = binary(BinOp::And, left, right);
        }
        Ok(left)
    }

    fn not(&mut self) -> Result<Expr> {
        if self.is_kw("not") && self.is_kw_at(1, "exists") {
            self.i += 2;
            return self.exists(true);
        }
        if self.eat_kw("not") {
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.comparison()
    }

    fn exists(&mut self, negated: bool) -> Result<Expr> {
        self.expect_sym("(")?;
        let query = Box::new(self.query()?);
        self.expect_sym(")")?;
        Ok(Expr::Exists { query, negated })
    }

    fn comparison(&mut self) -> Result<Expr> {
        let mut left = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("=" | "==")) => Some(BinOp::Eq),
                Some(Tok::Sym("!=" | "<>")) => Some(BinOp::NotEq),
                Some(Tok::Sym("<")) => Some(BinOp::Lt),
                Some(Tok::Sym("<=")) => Some(BinOp::LtEq),
                Some(Tok::Sym(">")) => Some(BinOp::Gt),
                Some(Tok::Sym(">=")) => Some(BinOp::GtEq),
                _ => None,
            };
            if let Some(op) = op {
                self.i += 1;
                let right = self.additive()?;
                left = binary(op, left, right);
                continue;
            }
            let negated = self.is_kw("not")
                && (self.is_kw_at(1, "like") || self.is_kw_at(1, "in") || self.is_kw_at(1, "between"));
            self.i += usize::from(negated);
            if self.eat_kw("like") {
                let right = self.additive()?;
                left = binary(if negated { BinOp::NotLike } else { BinOp::Like }, left, right);
            } else if self.eat_kw("in") {
                self.expect_sym("(")?;
                left = if self.starts_query(0) {
                    let query = Box::new(self.query()?);
                    Expr::InSubquery {
                        expr: Box::new(left),
                        query,
                        negated,
                    }
                } else {
                    Expr::InList {
                        expr: Box::new(left),
                        list: self.expr_list()?,
                        negated,
                    }
                };
                self.expect_sym(")")?;
            } else if self.eat_kw("between") {
                let low = self.additive()?;
                self.expect_kw("and")?;
                let high = self.additive()?;
                left = Expr::Between {
                    expr: Box::new(left),
                    low: Box::new(low),
                    high: Box::new(high),
                    negated,
                };
            } else if self.eat_kw("is") {
                let negated = self.eat_kw("not");
                self.expect_kw("null")?;
                left = Expr::IsNull {
                    expr: Box::new(left),
                    negated,
                };
            } else {
                return Ok(left);
            }
        }
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut left = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("+")) => BinOp::Add,
                Some(Tok::Sym("-")) => BinOp::Sub,
                _ => return Ok(left),
            };
            self.i += 1;
            let right = self.multiplicative()?;
            left = binary(op, left, right);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr> {
        let mut left = self.concat()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("*")) => BinOp::Mul,
                Some(Tok::Sym("/")) => BinOp::Div,
                Some(Tok::Sym("%")) => BinOp::Mod,
                _ => return Ok(left),
            };
            self.i += 1;
            let right = self.concat()?;
            left = binary(op, left, right);
        }
    }

    fn concat(&mut self) -> Result<Expr> {
        let mut left = self.unary()?;
        while self.eat_sym("||") {
            let right = self.unary()?;
            left = binary(BinOp::Concat, left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = Pos(self.pos());
        match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.i += 1;
                Ok(Expr::Literal(Literal::Number(n)))
            }
            Some(Tok::Str { value, quote }) => {
                self.i += 1;
                Ok(Expr::Literal(Literal::String { value, quote }))
            }
            Some(Tok::Sym("(")) => {
                self.i += 1;
                let e = if self.starts_query(0) {
                    Expr::Subquery(Box::new(self.query()?))
                } else {
                    self.expr()?
                };
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident { quoted: false, ref text }) if text.eq_ignore_ascii_case("null") => {
                self.i += 1;
                Ok(Expr::Literal(Literal::Null))
            }
            Some(Tok::Ident { quoted: false, ref text }) if text.eq_ignore_ascii_case("exists") => {
                self.i += 1;
                self.exists(false)
            }
            Some(Tok::Ident { quoted: false, ref text }) if text.eq_ignore_ascii_case("case") => {
                self.error("CASE expressions are not supported")
            }
            _ => {
                let Some(first) = self.name() else {
                    return self.error("expected an expression");
                };
                self.i += 1;
                if self.is_sym("(") {
                    return self.function(first);
                }
                if self.eat_sym(".") {
                    let name = self.expect_name("column name after `.`")?;
                    return Ok(Expr::Column {
                        table: Some(first),
                        name,
                        pos,
                    });
                }
                Ok(Expr::Column {
                    table: None,
                    name: first,
                    pos,
                })
            }
        }
    }

    fn function(&mut self, name: String) -> Result<Expr> {
        if !AGGREGATES.iter().any(|a| a.eq_ignore_ascii_case(&name)) {
            self.i -= 1;
            return self.error(format!("unsupported function `{name}`; expected COUNT, SUM, AVG, MIN or MAX"));
        }
        self.expect_sym("(")?;
        let pos = Pos(self.pos());
        let distinct = self.eat_kw("distinct");
        let args = if !distinct && self.eat_sym("*") {
            vec![Expr::Star { table: None, pos }]
        } else {
            self.expr_list()?
        };
        self.expect_sym(")")?;
        Ok(Expr::Function { name, distinct, args })
    }
}

fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
    Expr::Binary {
        op,
        left: Box::new(left),
        right: Box::new(right),
    }
}
