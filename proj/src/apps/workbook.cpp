#include "worldbench/apps/workbook.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>

namespace fs = std::filesystem;

namespace wb::apps {

bool valid_address(const std::string& addr) {
    size_t i = 0;
    while (i < addr.size() && addr[i] >= 'A' && addr[i] <= 'Z') ++i;
    if (i == 0 || i >= addr.size()) return false;
    if (addr[i] < '1' || addr[i] > '9') return false;
    for (size_t j = i; j < addr.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(addr[j]))) return false;
    }
    return true;
}

namespace {

struct AddrRC {
    int col;  // 1-based
    int row;  // 1-based
};

AddrRC addr_to_rc(const std::string& addr) {
    AddrRC rc{0, 0};
    size_t i = 0;
    while (i < addr.size() && addr[i] >= 'A' && addr[i] <= 'Z') {
        rc.col = rc.col * 26 + (addr[i] - 'A' + 1);
        ++i;
    }
    rc.row = std::stoi(addr.substr(i));
    return rc;
}

std::string rc_to_addr(int col, int row) {
    std::string letters;
    while (col > 0) {
        int rem = (col - 1) % 26;
        letters.insert(letters.begin(), static_cast<char>('A' + rem));
        col = (col - 1) / 26;
    }
    return letters + std::to_string(row);
}

// --- AST -------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    enum class Kind { Number, String, Boolean, Ref, Range, Func, Binary, Unary };
    Kind kind;
    double num = 0;
    std::string str;     // string literal / function name / binary op
    bool bval = false;
    std::string ref_a;   // ref, or range start
    std::string ref_b;   // range end
    std::vector<ExprPtr> args;
};

struct EvalErr {
    std::string cls;
    std::string msg;
};

// --- tokenizer -------------------------------------------------------------

struct Token {
    enum class Kind { Number, String, Ident, Op, End };
    Kind kind;
    double num = 0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ >= src_.size()) {
            tok_ = {Token::Kind::End, 0, ""};
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            size_t end = pos_;
            while (end < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) {
                ++end;
            }
            tok_ = {Token::Kind::Number, std::stod(src_.substr(pos_, end - pos_)), ""};
            pos_ = end;
            return;
        }
        if (c == '"') {
            size_t end = src_.find('"', pos_ + 1);
            if (end == std::string::npos) throw EvalErr{"EvalError", "unterminated string literal"};
            tok_ = {Token::Kind::String, 0, src_.substr(pos_ + 1, end - pos_ - 1)};
            pos_ = end + 1;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t end = pos_;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) ||
                                         src_[end] == '_')) {
                ++end;
            }
            tok_ = {Token::Kind::Ident, 0, src_.substr(pos_, end - pos_)};
            pos_ = end;
            return;
        }
        if (c == '>' || c == '<') {
            if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                tok_ = {Token::Kind::Op, 0, src_.substr(pos_, 2)};
                pos_ += 2;
                return;
            }
        }
        static const std::string singles = "+-*/()=,:";
        if (singles.find(c) != std::string::npos || c == '>' || c == '<') {
            tok_ = {Token::Kind::Op, 0, std::string(1, c)};
            ++pos_;
            return;
        }
        throw EvalErr{"EvalError", std::string("unexpected character '") + c + "'"};
    }

    std::string src_;
    size_t pos_ = 0;
    Token tok_;
};

// --- parser ----------------------------------------------------------------

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    ExprPtr parse() {
        ExprPtr e = compare();
        if (lex_.peek().kind != Token::Kind::End) {
            throw EvalErr{"EvalError", "trailing input after expression"};
        }
        return e;
    }

private:
    bool eat_op(const std::string& op) {
        if (lex_.peek().kind == Token::Kind::Op && lex_.peek().text == op) {
            lex_.take();
            return true;
        }
        return false;
    }

    void expect_op(const std::string& op) {
        if (!eat_op(op)) throw EvalErr{"EvalError", "expected '" + op + "'"};
    }

    ExprPtr compare() {
        ExprPtr left = addsub();
        while (lex_.peek().kind == Token::Kind::Op) {
            std::string op = lex_.peek().text;
            if (op != ">" && op != "<" && op != ">=" && op != "<=" && op != "=") break;
            lex_.take();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->str = op;
            node->args = {left, addsub()};
            left = node;
        }
        return left;
    }

    ExprPtr addsub() {
        ExprPtr left = muldiv();
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            std::string op = lex_.take().text;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->str = op;
            node->args = {left, muldiv()};
            left = node;
        }
        return left;
    }

    ExprPtr muldiv() {
        ExprPtr left = unary();
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            std::string op = lex_.take().text;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->str = op;
            node->args = {left, unary()};
            left = node;
        }
        return left;
    }

    ExprPtr unary() {
        if (eat_op("-")) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Unary;
            node->str = "-";
            node->args = {unary()};
            return node;
        }
        return primary();
    }

    ExprPtr primary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Number) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Number;
            node->num = lex_.take().num;
            return node;
        }
        if (t.kind == Token::Kind::String) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::String;
            node->str = lex_.take().text;
            return node;
        }
        if (t.kind == Token::Kind::Op && t.text == "(") {
            lex_.take();
            ExprPtr inner = compare();
            expect_op(")");
            return inner;
        }
        if (t.kind == Token::Kind::Ident) {
            std::string name = lex_.take().text;
            if (name == "TRUE" || name == "FALSE") {
                auto node = std::make_shared<Expr>();
                node->kind = Expr::Kind::Boolean;
                node->bval = name == "TRUE";
                return node;
            }
            if (name == "IF" || name == "SUM" || name == "AVERAGE") {
                expect_op("(");
                auto node = std::make_shared<Expr>();
                node->kind = Expr::Kind::Func;
                node->str = name;
                if (!eat_op(")")) {
                    node->args.push_back(argument());
                    while (eat_op(",")) node->args.push_back(argument());
                    expect_op(")");
                }
                if (name == "IF" && node->args.size() != 3) {
                    throw EvalErr{"EvalError", "IF takes three arguments"};
                }
                if ((name == "SUM" || name == "AVERAGE") && node->args.size() != 1) {
                    throw EvalErr{"EvalError", name + " takes one argument"};
                }
                return node;
            }
            if (valid_address(name)) {
                auto node = std::make_shared<Expr>();
                node->kind = Expr::Kind::Ref;
                node->ref_a = name;
                return node;
            }
            throw EvalErr{"EvalError", "unknown identifier '" + name + "'"};
        }
        throw EvalErr{"EvalError", "expected expression"};
    }

    // Function arguments additionally admit ranges.
    ExprPtr argument() {
        if (lex_.peek().kind == Token::Kind::Ident && valid_address(lex_.peek().text)) {
            std::string start = lex_.take().text;
            if (eat_op(":")) {
                if (lex_.peek().kind != Token::Kind::Ident || !valid_address(lex_.peek().text)) {
                    throw EvalErr{"EvalError", "expected address after ':'"};
                }
                auto node = std::make_shared<Expr>();
                node->kind = Expr::Kind::Range;
                node->ref_a = start;
                node->ref_b = lex_.take().text;
                return node;
            }
            // plain ref possibly continuing as a larger expression: rebuild
            auto ref = std::make_shared<Expr>();
            ref->kind = Expr::Kind::Ref;
            ref->ref_a = start;
            return continue_expr(ref);
        }
        return compare();
    }

    // Continues parsing with `left` as an already-consumed primary.
    ExprPtr continue_expr(ExprPtr left) {
        // muldiv level
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            std::string op = lex_.take().text;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->str = op;
            node->args = {left, unary()};
            left = node;
        }
        // addsub level
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            std::string op = lex_.take().text;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->str = op;
            node->args = {left, muldiv()};
            left = node;
        }
        // compare level
        while (lex_.peek().kind == Token::Kind::Op) {
            std::string op = lex_.peek().text;
            if (op != ">" && op != "<" && op != ">=" && op != "<=" && op != "=") break;
            lex_.take();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->str = op;
            node->args = {left, addsub()};
            left = node;
        }
        return left;
    }

    Lexer lex_;
};

ExprPtr parse_formula(const std::string& text) {
    std::string src = text;
    if (!src.empty() && src[0] == '=') src = src.substr(1);
    return Parser(src).parse();
}

// --- evaluation ------------------------------------------------------------

struct Value {
    enum class Kind { Num, Str, Bool, Empty };
    Kind kind = Kind::Empty;
    double num = 0;
    std::string str;
    bool b = false;

    static Value number(double v) { return {Kind::Num, v, "", false}; }
    static Value text(std::string s) { return {Kind::Str, 0, std::move(s), false}; }
    static Value boolean(bool v) { return {Kind::Bool, 0, "", v}; }
    static Value empty() { return {}; }
};

double as_number(const Value& v) {
    if (v.kind == Value::Kind::Num) return v.num;
    if (v.kind == Value::Kind::Empty) return 0;
    throw EvalErr{"EvalError", "type mismatch: expected number"};
}

class Evaluator {
public:
    Evaluator(const WorkbookState& wb, const std::string& sheet) : wb_(wb), sheet_(sheet) {}

    Value eval_cell(const std::string& addr) {
        auto memo = memo_.find(addr);
        if (memo != memo_.end()) return memo->second;
        if (visiting_.count(addr)) throw EvalErr{"CycleError", "reference cycle at " + addr};
        const Cell* cell = wb_.find_cell(sheet_, addr);
        Value v;
        if (!cell || (!cell->value && !cell->formula)) {
            v = Value::empty();
        } else if (cell->value) {
            v = from_scalar(*cell->value);
        } else {
            visiting_.insert(addr);
            v = eval(*parse_formula(*cell->formula));
            visiting_.erase(addr);
        }
        memo_[addr] = v;
        return v;
    }

    Value eval(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::Number:
                return Value::number(e.num);
            case Expr::Kind::String:
                return Value::text(e.str);
            case Expr::Kind::Boolean:
                return Value::boolean(e.bval);
            case Expr::Kind::Ref:
                return eval_cell(e.ref_a);
            case Expr::Kind::Range:
                throw EvalErr{"EvalError", "range outside SUM/AVERAGE"};
            case Expr::Kind::Unary:
                return Value::number(-as_number(eval(*e.args[0])));
            case Expr::Kind::Binary:
                return eval_binary(e);
            case Expr::Kind::Func:
                return eval_func(e);
        }
        throw EvalErr{"EvalError", "unreachable"};
    }

private:
    Value from_scalar(const Scalar& s) {
        if (std::holds_alternative<double>(s)) return Value::number(std::get<double>(s));
        if (std::holds_alternative<bool>(s)) return Value::boolean(std::get<bool>(s));
        return Value::text(std::get<std::string>(s));
    }

    Value eval_binary(const Expr& e) {
        Value l = eval(*e.args[0]);
        Value r = eval(*e.args[1]);
        const std::string& op = e.str;
        if (op == "+") return Value::number(as_number(l) + as_number(r));
        if (op == "-") return Value::number(as_number(l) - as_number(r));
        if (op == "*") return Value::number(as_number(l) * as_number(r));
        if (op == "/") {
            double d = as_number(r);
            if (d == 0) throw EvalErr{"EvalError", "division by zero"};
            return Value::number(as_number(l) / d);
        }
        if (op == ">") return Value::boolean(as_number(l) > as_number(r));
        if (op == "<") return Value::boolean(as_number(l) < as_number(r));
        if (op == ">=") return Value::boolean(as_number(l) >= as_number(r));
        if (op == "<=") return Value::boolean(as_number(l) <= as_number(r));
        // '='
        return Value::boolean(values_equal(l, r));
    }

    static bool values_equal(Value l, Value r) {
        if (l.kind == Value::Kind::Empty && r.kind == Value::Kind::Empty) return true;
        if (l.kind == Value::Kind::Empty) std::swap(l, r);
        if (r.kind == Value::Kind::Empty) {
            if (l.kind == Value::Kind::Num) r = Value::number(0);
            else if (l.kind == Value::Kind::Str) r = Value::text("");
            else return false;
        }
        if (l.kind != r.kind) return false;
        switch (l.kind) {
            case Value::Kind::Num:
                return numbers_equal(l.num, r.num);
            case Value::Kind::Str:
                return l.str == r.str;
            case Value::Kind::Bool:
                return l.b == r.b;
            default:
                return true;
        }
    }

    Value eval_func(const Expr& e) {
        if (e.str == "IF") {
            Value cond = eval(*e.args[0]);
            bool truthy;
            switch (cond.kind) {
                case Value::Kind::Bool: truthy = cond.b; break;
                case Value::Kind::Num: truthy = cond.num != 0; break;
                case Value::Kind::Empty: truthy = false; break;
                default: throw EvalErr{"EvalError", "IF condition must be boolean or number"};
            }
            return eval(truthy ? *e.args[1] : *e.args[2]);
        }
        // SUM / AVERAGE
        const Expr& arg = *e.args[0];
        std::vector<Value> items;
        if (arg.kind == Expr::Kind::Range) {
            AddrRC a = addr_to_rc(arg.ref_a);
            AddrRC b = addr_to_rc(arg.ref_b);
            int c0 = std::min(a.col, b.col), c1 = std::max(a.col, b.col);
            int r0 = std::min(a.row, b.row), r1 = std::max(a.row, b.row);
            for (int c = c0; c <= c1; ++c) {
                for (int r = r0; r <= r1; ++r) items.push_back(eval_cell(rc_to_addr(c, r)));
            }
        } else {
            items.push_back(eval(arg));
        }
        double total = 0;
        int count = 0;
        for (const Value& v : items) {
            if (v.kind == Value::Kind::Num) {
                total += v.num;
                ++count;
            }
        }
        if (e.str == "SUM") return Value::number(total);
        if (count == 0) throw EvalErr{"EvalError", "division by zero"};
        return Value::number(total / count);
    }

    const WorkbookState& wb_;
    std::string sheet_;
    std::map<std::string, Value> memo_;
    std::set<std::string> visiting_;
};

Scalar value_to_scalar(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Num: return Scalar(v.num);
        case Value::Kind::Str: return Scalar(v.str);
        case Value::Kind::Bool: return Scalar(v.b);
        case Value::Kind::Empty: return Scalar(0.0);  // numeric context at the top level
    }
    return Scalar(0.0);
}

void collect_refs(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::Ref:
            out.push_back(e.ref_a);
            break;
        case Expr::Kind::Range: {
            AddrRC a = addr_to_rc(e.ref_a);
            AddrRC b = addr_to_rc(e.ref_b);
            int c0 = std::min(a.col, b.col), c1 = std::max(a.col, b.col);
            int r0 = std::min(a.row, b.row), r1 = std::max(a.row, b.row);
            if (static_cast<long>(c1 - c0 + 1) * (r1 - r0 + 1) > 100000) {
                throw EvalErr{"EvalError", "range too large"};
            }
            for (int c = c0; c <= c1; ++c) {
                for (int r = r0; r <= r1; ++r) out.push_back(rc_to_addr(c, r));
            }
            break;
        }
        default:
            for (const auto& a : e.args) collect_refs(*a, out);
    }
}

}  // namespace

EvalOutcome eval_formula(const WorkbookState& wb, const std::string& sheet,
                         const std::string& addr) {
    const Cell* cell = wb.find_cell(sheet, addr);
    if (!cell || !cell->formula) {
        return {std::nullopt, "EvalError", "cell " + addr + " holds no formula"};
    }
    return eval_formula_text(wb, sheet, *cell->formula);
}

EvalOutcome eval_formula_text(const WorkbookState& wb, const std::string& sheet,
                              const std::string& text) {
    try {
        Evaluator ev(wb, sheet);
        Value v = ev.eval(*parse_formula(text));
        return {value_to_scalar(v), "", ""};
    } catch (const EvalErr& e) {
        return {std::nullopt, e.cls, e.msg};
    }
}

std::vector<std::string> formula_refs(const std::string& text) {
    std::vector<std::string> out;
    try {
        collect_refs(*parse_formula(text), out);
    } catch (const EvalErr&) {
        // unparsable formulas contribute no edges
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool formula_parses(const std::string& text, std::string* error) {
    try {
        parse_formula(text);
        return true;
    } catch (const EvalErr& e) {
        if (error) *error = e.msg;
        return false;
    }
}

bool would_create_cycle(const WorkbookState& wb, const std::string& sheet,
                        const std::string& addr, const std::string& text) {
    const Sheet* s = wb.find_sheet(sheet);
    std::map<std::string, std::vector<std::string>> deps;
    if (s) {
        for (const auto& [a, cell] : s->cells) {
            if (cell.formula) deps[a] = formula_refs(*cell.formula);
        }
    }
    deps[addr] = formula_refs(text);

    std::set<std::string> visiting, done;
    std::function<bool(const std::string&)> dfs = [&](const std::string& node) -> bool {
        if (done.count(node)) return false;
        if (visiting.count(node)) return true;
        auto it = deps.find(node);
        if (it == deps.end()) return false;
        visiting.insert(node);
        for (const auto& next : it->second) {
            if (dfs(next)) return true;
        }
        visiting.erase(node);
        done.insert(node);
        return false;
    };
    return dfs(addr);
}

// --- state -----------------------------------------------------------------

const Sheet* WorkbookState::find_sheet(const std::string& name) const {
    for (const auto& s : sheets) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

Sheet* WorkbookState::find_sheet(const std::string& name) {
    for (auto& s : sheets) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const Cell* WorkbookState::find_cell(const std::string& sheet, const std::string& addr) const {
    const Sheet* s = find_sheet(sheet);
    if (!s) return nullptr;
    auto it = s->cells.find(addr);
    return it == s->cells.end() ? nullptr : &it->second;
}

Json workbook_to_json(const WorkbookState& s) {
    Json sheets = Json::array();
    for (const auto& sheet : s.sheets) {
        Json cells = Json::object();
        for (const auto& [addr, cell] : sheet.cells) {
            Json c = Json::object();
            if (cell.formula) {
                c["f"] = *cell.formula;
            } else if (cell.value) {
                c["v"] = scalar_to_json(*cell.value);
            }
            if (cell.bold) c["style"] = Json{{"bold", true}};
            cells[addr] = c;
        }
        sheets.push_back(Json{{"name", sheet.name}, {"cells", cells}});
    }
    return Json{{"sheets", sheets}};
}

WorkbookState workbook_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("sheets") || !j["sheets"].is_array()) {
        throw Error("MalformedState", "workbook document must contain a sheets array");
    }
    WorkbookState s;
    for (const auto& js : j["sheets"]) {
        Sheet sheet;
        sheet.name = js.at("name").get<std::string>();
        if (s.find_sheet(sheet.name)) {
            throw Error("MalformedState", "duplicate sheet name: " + sheet.name);
        }
        if (js.contains("cells")) {
            for (const auto& [addr, jc] : js["cells"].items()) {
                if (!valid_address(addr)) {
                    throw Error("MalformedState", "invalid cell address: " + addr);
                }
                Cell cell;
                if (jc.contains("f")) {
                    std::string err;
                    std::string f = jc["f"].get<std::string>();
                    if (!formula_parses(f, &err)) {
                        throw Error("MalformedState", "formula at " + addr + ": " + err);
                    }
                    cell.formula = f;
                } else if (jc.contains("v")) {
                    cell.value = scalar_from_json(jc["v"]);
                }
                if (jc.contains("style") && jc["style"].value("bold", false)) cell.bold = true;
                sheet.cells[addr] = cell;
            }
        }
        s.sheets.push_back(std::move(sheet));
    }
    // acyclicity is a load invariant
    for (const auto& sheet : s.sheets) {
        for (const auto& [addr, cell] : sheet.cells) {
            if (cell.formula && would_create_cycle(s, sheet.name, addr, *cell.formula)) {
                throw Error("MalformedState",
                            "formula cycle involving " + sheet.name + "!" + addr);
            }
        }
    }
    return s;
}

Json WorkbookState::to_canonical_json() const {
    Json j = workbook_to_json(*this);
    // canonical number text keeps digests stable across float formatting
    for (auto& sheet : j["sheets"]) {
        for (auto& [addr, cell] : sheet["cells"].items()) {
            (void)addr;
            if (cell.contains("v") && cell["v"].is_number()) {
                cell["v"] = format_number(cell["v"].get<double>());
            }
        }
    }
    j["app"] = "workbook";
    return j;
}

void persist_workbook(const WorkbookState& s, const std::string& sandbox_root,
                      std::vector<std::string>* written) {
    write_file((fs::path(sandbox_root) / kWorkbookFile).string(), workbook_to_json(s).dump(2) + "\n");
    if (written) written->push_back(kWorkbookFile);
}

WorkbookState load_workbook(const std::string& sandbox_root) {
    fs::path file = fs::path(sandbox_root) / kWorkbookFile;
    if (!fs::exists(file)) throw Error("MissingState", "workbook not found at " + file.string());
    Json j;
    try {
        j = Json::parse(read_file(file.string()));
    } catch (const Json::parse_error& e) {
        throw Error("MalformedState", file.string() + ": byte offset " + std::to_string(e.byte) +
                                          ": " + e.what());
    }
    return workbook_from_json(j);
}

}  // namespace wb::apps
