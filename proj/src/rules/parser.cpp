#include "flowgate/rules/parser.hpp"

#include <cctype>
#include <set>

#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::rules {

namespace {

[[noreturn]] void fail(int line, int column, const std::string& message) {
    raise(errc::syntax_error,
          "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message);
}

const std::set<std::string, std::less<>> kKeywords = {
    "modality", "study_description", "series_description", "slice_thickness",
    "sop_class", "accession", "source",
};
const std::set<std::string, std::less<>> kNumericKeywords = {"slice_thickness"};

// --- expression tokenizer ---------------------------------------------------

struct token {
    enum class kind { identifier, tag_literal, string_literal, number, op, lparen, rparen, end };
    kind k = kind::end;
    std::string text;
    dicom::tag tag_value;
    double number_value = 0;
    int column = 0;
};

class lexer {
public:
    lexer(std::string_view text, int line) : text_(text), line_(line) { advance(); }

    const token& peek() const { return current_; }

    token take() {
        token t = current_;
        advance();
        return t;
    }

    int line() const { return line_; }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        current_ = token {};
        current_.column = static_cast<int>(pos_) + 1;
        if (pos_ >= text_.size()) {
            current_.k = token::kind::end;
            return;
        }
        char c = text_[pos_];

        if (c == '(') {
            // Could be a tag literal "(gggg,eeee)" or a grouping paren.
            dicom::tag t;
            if (pos_ + 11 <= text_.size() && dicom::parse_tag(text_.substr(pos_, 11), t)) {
                current_.k = token::kind::tag_literal;
                current_.tag_value = t;
                current_.text = std::string(text_.substr(pos_, 11));
                pos_ += 11;
                return;
            }
            current_.k = token::kind::lparen;
            ++pos_;
            return;
        }
        if (c == ')') {
            current_.k = token::kind::rparen;
            ++pos_;
            return;
        }
        if (c == '"') {
            ++pos_;
            std::string value;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size() &&
                    (text_[pos_ + 1] == '"' || text_[pos_ + 1] == '\\')) {
                    value.push_back(text_[pos_ + 1]);
                    pos_ += 2;
                } else {
                    value.push_back(text_[pos_]);
                    ++pos_;
                }
            }
            if (pos_ >= text_.size()) fail(line_, current_.column, "unterminated string literal");
            ++pos_;
            current_.k = token::kind::string_literal;
            current_.text = std::move(value);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            size_t start = pos_;
            ++pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
                ++pos_;
            }
            auto lexeme = text_.substr(start, pos_ - start);
            auto v = util::parse_decimal(lexeme);
            if (!v) fail(line_, current_.column, "malformed number '" + std::string(lexeme) + "'");
            current_.k = token::kind::number;
            current_.number_value = *v;
            current_.text = std::string(lexeme);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '_')) {
                ++pos_;
            }
            current_.k = token::kind::identifier;
            current_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        // operators
        static const char* ops[] = {"==", "!=", "<=", ">=", "~", "<", ">"};
        for (const char* op : ops) {
            std::string_view sv(op);
            if (text_.substr(pos_, sv.size()) == sv) {
                current_.k = token::kind::op;
                current_.text = std::string(sv);
                pos_ += sv.size();
                return;
            }
        }
        fail(line_, current_.column, std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    int line_;
    size_t pos_ = 0;
    token current_;
};

// --- expression parser -------------------------------------------------------

compare_op op_from_token(const std::string& t, int line, int column) {
    if (t == "==") return compare_op::eq;
    if (t == "!=") return compare_op::ne;
    if (t == "~") return compare_op::matches;
    if (t == "<") return compare_op::lt;
    if (t == "<=") return compare_op::le;
    if (t == ">") return compare_op::gt;
    if (t == ">=") return compare_op::ge;
    fail(line, column, "expected comparison operator, got '" + t + "'");
}

std::shared_ptr<const std::regex> compile_regex(const std::string& pattern, int line, int column) {
    std::string body = pattern;
    auto flags = std::regex::ECMAScript;
    if (util::starts_with(body, "(?i)")) {
        body = body.substr(4);
        flags |= std::regex::icase;
    }
    try {
        return std::make_shared<const std::regex>(body, flags);
    } catch (const std::regex_error& e) {
        fail(line, column, std::string("invalid regular expression: ") + e.what());
    }
}

class expr_parser {
public:
    expr_parser(std::string_view text, int line) : lex_(text, line), line_(line) {}

    match_expr parse() {
        match_expr e = parse_or();
        if (lex_.peek().k != token::kind::end) {
            fail(line_, lex_.peek().column, "trailing input after expression");
        }
        return e;
    }

private:
    match_expr parse_or() {
        match_expr left = parse_and();
        while (lex_.peek().k == token::kind::identifier && lex_.peek().text == "or") {
            lex_.take();
            match_expr node;
            node.kind = match_expr::node_kind::or_node;
            node.children.push_back(std::move(left));
            node.children.push_back(parse_and());
            left = std::move(node);
        }
        return left;
    }

    match_expr parse_and() {
        match_expr left = parse_unary();
        while (lex_.peek().k == token::kind::identifier && lex_.peek().text == "and") {
            lex_.take();
            match_expr node;
            node.kind = match_expr::node_kind::and_node;
            node.children.push_back(std::move(left));
            node.children.push_back(parse_unary());
            left = std::move(node);
        }
        return left;
    }

    match_expr parse_unary() {
        if (lex_.peek().k == token::kind::identifier && lex_.peek().text == "not") {
            lex_.take();
            match_expr node;
            node.kind = match_expr::node_kind::not_node;
            node.children.push_back(parse_unary());
            return node;
        }
        return parse_primary();
    }

    match_expr parse_primary() {
        const token& t = lex_.peek();
        if (t.k == token::kind::lparen) {
            lex_.take();
            match_expr inner = parse_or();
            if (lex_.peek().k != token::kind::rparen) {
                fail(line_, lex_.peek().column, "expected ')'");
            }
            lex_.take();
            return inner;
        }
        if (t.k == token::kind::identifier && (t.text == "true" || t.text == "false")) {
            match_expr node;
            node.kind = match_expr::node_kind::constant;
            node.constant_value = (t.text == "true");
            lex_.take();
            return node;
        }
        return parse_predicate();
    }

    match_expr parse_predicate() {
        token attr = lex_.take();
        predicate p;
        bool numeric_attribute = false;
        if (attr.k == token::kind::tag_literal) {
            p.is_tag = true;
            p.attr_tag = attr.tag_value;
        } else if (attr.k == token::kind::identifier) {
            if (kKeywords.find(attr.text) == kKeywords.end()) {
                fail(line_, attr.column, "unknown attribute '" + attr.text + "'");
            }
            p.keyword = attr.text;
            numeric_attribute = kNumericKeywords.count(attr.text) > 0;
        } else {
            fail(line_, attr.column, "expected attribute selector");
        }

        token op_tok = lex_.take();
        if (op_tok.k != token::kind::op) {
            fail(line_, op_tok.column, "expected comparison operator");
        }
        p.op = op_from_token(op_tok.text, line_, op_tok.column);

        token lit = lex_.take();
        if (lit.k == token::kind::number) {
            p.numeric_literal = true;
            p.number = lit.number_value;
        } else if (lit.k == token::kind::string_literal) {
            p.numeric_literal = false;
            p.text = lit.text;
        } else {
            fail(line_, lit.column, "expected string or decimal literal");
        }

        bool numeric_op = p.op == compare_op::lt || p.op == compare_op::le ||
                          p.op == compare_op::gt || p.op == compare_op::ge;
        if (numeric_op && !p.numeric_literal) {
            fail(line_, lit.column, "numeric comparison requires a decimal literal");
        }
        if (p.op == compare_op::matches) {
            if (p.numeric_literal) {
                fail(line_, lit.column, "'~' requires a regular-expression string");
            }
            if (numeric_attribute) {
                fail(line_, attr.column,
                     "'~' cannot apply to numeric attribute '" + p.keyword + "'");
            }
            p.compiled_regex = compile_regex(p.text, line_, lit.column);
        }
        match_expr node;
        node.kind = match_expr::node_kind::pred;
        node.pred = std::move(p);
        return node;
    }

    lexer lex_;
    int line_;
};

// --- section-level parsing ----------------------------------------------------

uint16_t parse_port(const std::string& value, int line) {
    auto v = util::parse_integer(value);
    if (!v || *v < 1 || *v > 65535) {
        fail(line, 1, "port must be 1-65535, got '" + value + "'");
    }
    return static_cast<uint16_t>(*v);
}

dimse::ae_title parse_ae(const std::string& value, int line) {
    try {
        return dimse::ae_title::parse(value);
    } catch (const error& e) {
        fail(line, 1, e.what());
    }
}

dicom::tag take_tag(lexer& lex, int line) {
    token t = lex.take();
    if (t.k != token::kind::tag_literal) {
        fail(line, t.column, "expected (gggg,eeee) tag literal");
    }
    return t.tag_value;
}

morph_op parse_morph(const std::string& value, int line) {
    lexer lex(value, line);
    token kw = lex.take();
    if (kw.k != token::kind::identifier) fail(line, kw.column, "expected set/delete/copy");
    morph_op op;
    if (kw.text == "set") {
        op.kind = morph_op::op_kind::set;
        op.target = take_tag(lex, line);
        token vr_tok = lex.take();
        auto v = dicom::vr_from_code(vr_tok.text);
        if (vr_tok.k != token::kind::identifier || !v) {
            fail(line, vr_tok.column, "expected VR code after tag");
        }
        op.set_vr = *v;
        token val = lex.take();
        if (val.k != token::kind::string_literal) {
            fail(line, val.column, "expected quoted value");
        }
        op.value = val.text;
    } else if (kw.text == "delete") {
        op.kind = morph_op::op_kind::remove;
        op.target = take_tag(lex, line);
    } else if (kw.text == "copy") {
        // copy (gggg,eeee) -> (gggg,eeee); the arrow is handled textually.
        op.kind = morph_op::op_kind::copy;
        auto arrow = value.find("->");
        if (arrow == std::string::npos) fail(line, 1, "copy needs '->'");
        std::string from = util::trim(value.substr(4, arrow - 4));
        std::string to = util::trim(value.substr(arrow + 2));
        if (!dicom::parse_tag(from, op.copy_from) || !dicom::parse_tag(to, op.target)) {
            fail(line, 1, "copy needs two (gggg,eeee) tags");
        }
        return op;
    } else {
        fail(line, kw.column, "unknown morph op '" + kw.text + "'");
    }
    if (lex.peek().k != token::kind::end) {
        fail(line, lex.peek().column, "trailing input after morph op");
    }
    return op;
}

std::vector<std::string> parse_route_names(const std::string& list_part, int line) {
    std::vector<std::string> names;
    for (auto& part : util::split(list_part, ',')) {
        auto name = util::trim(part);
        if (name.empty()) fail(line, 1, "empty destination name in route");
        names.push_back(std::move(name));
    }
    return names;
}

}  // namespace

match_expr parse_match_expr(std::string_view text, int line) {
    return expr_parser(text, line).parse();
}

rule_set parse_rules_sections(const std::vector<util::section>& sections, uint64_t version) {
    rule_set rs;
    rs.version = version;

    std::set<std::string> source_names;
    std::set<std::string> destination_names;
    std::set<std::string> rule_names;

    for (const auto& sec : sections) {
        if (sec.kind == "source") {
            if (sec.name.empty()) fail(sec.line, 1, "[source] needs a name");
            if (!source_names.insert(sec.name).second) {
                raise(errc::duplicate_name, "source '" + sec.name + "'");
            }
            source_def s;
            s.name = sec.name;
            const std::string* ae = sec.find("calling_ae");
            if (ae == nullptr) fail(sec.line, 1, "source '" + sec.name + "' needs calling_ae");
            s.calling_ae = parse_ae(*ae, sec.line);
            if (const auto* peer = sec.find("peer_address")) s.peer_address = *peer;
            if (const auto* cls = sec.find("class")) {
                if (*cls != "modality" && *cls != "ai") {
                    fail(sec.line, 1, "source class must be modality or ai");
                }
                s.source_class = *cls;
            }
            rs.sources.push_back(std::move(s));
        } else if (sec.kind == "destination") {
            if (sec.name.empty()) fail(sec.line, 1, "[destination] needs a name");
            if (!destination_names.insert(sec.name).second) {
                raise(errc::duplicate_name, "destination '" + sec.name + "'");
            }
            destination_def d;
            d.name = sec.name;
            const std::string* host = sec.find("host");
            const std::string* port = sec.find("port");
            const std::string* called = sec.find("called_ae");
            if (host == nullptr || port == nullptr || called == nullptr) {
                fail(sec.line, 1,
                     "destination '" + sec.name + "' needs host, port, called_ae");
            }
            d.host = *host;
            d.port = parse_port(*port, sec.line);
            d.called_ae = parse_ae(*called, sec.line);
            if (const auto* calling = sec.find("calling_ae")) {
                d.calling_ae_override = parse_ae(*calling, sec.line);
            }
            rs.destinations.push_back(std::move(d));
        } else if (sec.kind == "rule") {
            if (sec.name.empty()) fail(sec.line, 1, "[rule] needs a name");
            if (!rule_names.insert(sec.name).second) {
                raise(errc::duplicate_name, "rule '" + sec.name + "'");
            }
            rule r;
            r.name = sec.name;
            bool have_when = false;
            bool have_route = false;
            bool have_priority = false;
            for (const auto& entry : sec.entries) {
                if (entry.key == "when") {
                    r.when = parse_match_expr(entry.value, entry.line);
                    have_when = true;
                } else if (entry.key == "route") {
                    if (have_route) {
                        fail(entry.line, 1, "rule '" + r.name + "' has more than one route");
                    }
                    have_route = true;
                    action a;
                    a.kind = action::action_kind::route;
                    a.mode = route_mode::parallel;
                    std::string list_part = entry.value;
                    auto colon = entry.value.rfind(':');
                    if (colon != std::string::npos) {
                        auto mode = util::trim(entry.value.substr(colon + 1));
                        if (mode == "parallel") a.mode = route_mode::parallel;
                        else if (mode == "serial") a.mode = route_mode::serial;
                        else fail(entry.line, 1, "route mode must be parallel or serial");
                        list_part = entry.value.substr(0, colon);
                    }
                    a.destinations = parse_route_names(list_part, entry.line);
                    r.actions.push_back(std::move(a));
                } else if (entry.key == "block") {
                    if (entry.value != "true") fail(entry.line, 1, "block only takes 'true'");
                    action a;
                    a.kind = action::action_kind::block;
                    r.actions.push_back(std::move(a));
                } else if (entry.key == "morph") {
                    action a;
                    a.kind = action::action_kind::morph;
                    a.morphs.push_back(parse_morph(entry.value, entry.line));
                    r.actions.push_back(std::move(a));
                } else if (entry.key == "priority") {
                    if (have_priority) {
                        fail(entry.line, 1, "rule '" + r.name + "' has more than one priority");
                    }
                    have_priority = true;
                    auto p = priority_from_name(entry.value);
                    if (!p) fail(entry.line, 1, "priority must be HIGH, MEDIUM or LOW");
                    action a;
                    a.kind = action::action_kind::priority;
                    a.priority = *p;
                    r.actions.push_back(std::move(a));
                } else if (entry.key == "continue") {
                    if (entry.value == "true") r.continue_after_match = true;
                    else if (entry.value == "false") r.continue_after_match = false;
                    else fail(entry.line, 1, "continue only takes true|false");
                } else {
                    fail(entry.line, 1, "unknown rule key '" + entry.key + "'");
                }
            }
            if (!have_when) fail(sec.line, 1, "rule '" + r.name + "' needs a when expression");
            rs.rules.push_back(std::move(r));
        } else {
            fail(sec.line, 1, "unknown section kind '" + sec.kind + "'");
        }
    }

    // Cross-reference check.
    for (const auto& r : rs.rules) {
        for (const auto& a : r.actions) {
            if (a.kind != action::action_kind::route) continue;
            for (const auto& name : a.destinations) {
                if (rs.find_destination(name) == nullptr) {
                    raise(errc::unresolved_reference,
                          "rule '" + r.name + "' routes to undeclared destination '" + name + "'");
                }
            }
        }
    }
    return rs;
}

rule_set parse_rules(std::string_view text, uint64_t version) {
    return parse_rules_sections(util::scan_sections(text), version);
}

}  // namespace flowgate::rules
