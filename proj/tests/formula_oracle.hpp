#pragma once

// Independent brute-force formula interpreter plus random-formula generators.
// This is the oracle the evaluator is differentially tested against: token
// vector + direct recursive evaluation, no AST, errors as values. Shared by
// the apps test and the acceptance gate.

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "worldbench/apps/workbook.hpp"
#include "worldbench/common.hpp"

namespace wb_testing {

using namespace wb;
using namespace wb::apps;

// ---- independent brute-force interpreter (the oracle) ----------------------
//
// A second, structurally different implementation of the formula contract:
// token vector + direct recursive evaluation, no AST, errors as values.

namespace oracle {

struct Val {
    enum K { Num, Str, Bool, Empty, Err } k = Empty;
    double n = 0;
    std::string s;  // string payload or error class
    bool b = false;

    static Val num(double v) { return {Num, v, "", false}; }
    static Val str(std::string v) { return {Str, 0, std::move(v), false}; }
    static Val boolean(bool v) { return {Bool, 0, "", v}; }
    static Val err(std::string cls) { return {Err, 0, std::move(cls), false}; }
};

struct Ctx {
    const WorkbookState* wb;
    std::string sheet;
    std::vector<std::string> toks;
    size_t pos = 0;
    std::map<std::string, Val> memo;
    std::set<std::string> visiting;
};

inline std::vector<std::string> tokenize(const std::string& raw) {
    std::string src = raw;
    if (!src.empty() && src[0] == '=') src = src.substr(1);
    std::vector<std::string> out;
    size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            out.push_back("#" + src.substr(i, j - i));  // number marker
            i = j;
            continue;
        }
        if (c == '"') {
            size_t j = src.find('"', i + 1);
            if (j == std::string::npos) { out.push_back("!ERR"); return out; }
            out.push_back("$" + src.substr(i + 1, j - i - 1));  // string marker
            i = j + 1;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back(src.substr(i, j - i));
            i = j;
            continue;
        }
        if ((c == '>' || c == '<') && i + 1 < src.size() && src[i + 1] == '=') {
            out.push_back(src.substr(i, 2));
            i += 2;
            continue;
        }
        out.push_back(std::string(1, c));
        ++i;
    }
    return out;
}

inline Val compare(Ctx& c);
inline Val cell(Ctx& c, const std::string& addr);

inline bool at(Ctx& c, const std::string& t) { return c.pos < c.toks.size() && c.toks[c.pos] == t; }

inline double want_num(const Val& v, bool& bad) {
    if (v.k == Val::Num) return v.n;
    if (v.k == Val::Empty) return 0;
    bad = true;
    return 0;
}

inline Val range_sum(Ctx& c, const std::string& a, const std::string& b, bool average) {
    auto rc = [](const std::string& addr) {
        size_t i = 0;
        long col = 0;
        while (i < addr.size() && std::isupper(static_cast<unsigned char>(addr[i]))) {
            col = col * 26 + (addr[i] - 'A' + 1);
            ++i;
        }
        return std::pair<long, long>(col, std::stol(addr.substr(i)));
    };
    auto [c0, r0] = rc(a);
    auto [c1, r1] = rc(b);
    if (c0 > c1) std::swap(c0, c1);
    if (r0 > r1) std::swap(r0, r1);
    double total = 0;
    int count = 0;
    for (long col = c0; col <= c1; ++col) {
        for (long row = r0; row <= r1; ++row) {
            std::string addr;
            long cc = col;
            while (cc > 0) {
                addr.insert(addr.begin(), static_cast<char>('A' + (cc - 1) % 26));
                cc = (cc - 1) / 26;
            }
            addr += std::to_string(row);
            Val v = cell(c, addr);
            if (v.k == Val::Err) return v;
            if (v.k == Val::Num) {
                total += v.n;
                ++count;
            }
        }
    }
    if (average) {
        if (count == 0) return Val::err("EvalError");
        return Val::num(total / count);
    }
    return Val::num(total);
}

inline Val argument(Ctx& c) {
    // range special case: ADDR ':' ADDR
    if (c.pos + 2 < c.toks.size() && valid_address(c.toks[c.pos]) && c.toks[c.pos + 1] == ":") {
        // leave handling to the caller via a marker value
        Val v = Val::err("RANGE@" + c.toks[c.pos] + "@" + c.toks[c.pos + 2]);
        if (!valid_address(c.toks[c.pos + 2])) v = Val::err("EvalError");
        c.pos += 3;
        return v;
    }
    return compare(c);
}

inline Val primary(Ctx& c) {
    if (c.pos >= c.toks.size()) return Val::err("EvalError");
    std::string t = c.toks[c.pos];
    if (t == "!ERR") return Val::err("EvalError");
    if (t[0] == '#') {
        ++c.pos;
        return Val::num(std::stod(t.substr(1)));
    }
    if (t[0] == '$') {
        ++c.pos;
        return Val::str(t.substr(1));
    }
    if (t == "(") {
        ++c.pos;
        Val v = compare(c);
        if (!at(c, ")")) return Val::err("EvalError");
        ++c.pos;
        return v;
    }
    if (t == "-") {
        ++c.pos;
        Val v = primary(c);
        if (v.k == Val::Err) return v;
        bool bad = false;
        double n = want_num(v, bad);
        return bad ? Val::err("EvalError") : Val::num(-n);
    }
    if (t == "TRUE" || t == "FALSE") {
        ++c.pos;
        return Val::boolean(t == "TRUE");
    }
    if (t == "IF" || t == "SUM" || t == "AVERAGE") {
        ++c.pos;
        if (!at(c, "(")) return Val::err("EvalError");
        ++c.pos;
        std::vector<Val> args;
        if (!at(c, ")")) {
            args.push_back(argument(c));
            while (at(c, ",")) {
                ++c.pos;
                args.push_back(argument(c));
            }
        }
        if (!at(c, ")")) return Val::err("EvalError");
        ++c.pos;
        auto is_range = [](const Val& v) {
            return v.k == Val::Err && v.s.rfind("RANGE@", 0) == 0;
        };
        if (t == "IF") {
            if (args.size() != 3) return Val::err("EvalError");
            for (auto& a : args) {
                if (is_range(a)) a = Val::err("EvalError");
            }
            const Val& cond = args[0];
            if (cond.k == Val::Err) return cond;
            bool truthy;
            if (cond.k == Val::Bool) truthy = cond.b;
            else if (cond.k == Val::Num) truthy = cond.n != 0;
            else if (cond.k == Val::Empty) truthy = false;
            else return Val::err("EvalError");
            return args[truthy ? 1 : 2];
        }
        if (args.size() != 1) return Val::err("EvalError");
        if (is_range(args[0])) {
            size_t p1 = args[0].s.find('@');
            size_t p2 = args[0].s.find('@', p1 + 1);
            return range_sum(c, args[0].s.substr(p1 + 1, p2 - p1 - 1), args[0].s.substr(p2 + 1),
                             t == "AVERAGE");
        }
        if (args[0].k == Val::Err) return args[0];
        double total = 0;
        int count = 0;
        if (args[0].k == Val::Num) {
            total = args[0].n;
            count = 1;
        }
        if (t == "SUM") return Val::num(total);
        if (count == 0) return Val::err("EvalError");
        return Val::num(total / count);
    }
    if (valid_address(t)) {
        ++c.pos;
        return cell(c, t);
    }
    return Val::err("EvalError");
}

inline Val muldiv(Ctx& c) {
    Val left = primary(c);
    while (at(c, "*") || at(c, "/")) {
        std::string op = c.toks[c.pos++];
        Val right = primary(c);
        if (left.k == Val::Err) continue;  // keep consuming, first error wins
        if (right.k == Val::Err) { left = right; continue; }
        bool bad = false;
        double l = want_num(left, bad), r = want_num(right, bad);
        if (bad) { left = Val::err("EvalError"); continue; }
        if (op == "/" && r == 0) { left = Val::err("EvalError"); continue; }
        left = Val::num(op == "*" ? l * r : l / r);
    }
    return left;
}

inline Val addsub(Ctx& c) {
    Val left = muldiv(c);
    while (at(c, "+") || at(c, "-")) {
        std::string op = c.toks[c.pos++];
        Val right = muldiv(c);
        if (left.k == Val::Err) continue;
        if (right.k == Val::Err) { left = right; continue; }
        bool bad = false;
        double l = want_num(left, bad), r = want_num(right, bad);
        if (bad) { left = Val::err("EvalError"); continue; }
        left = Val::num(op == "+" ? l + r : l - r);
    }
    return left;
}

inline bool vals_equal(Val l, Val r) {
    if (l.k == Val::Empty && r.k == Val::Empty) return true;
    if (l.k == Val::Empty) std::swap(l, r);
    if (r.k == Val::Empty) {
        if (l.k == Val::Num) r = Val::num(0);
        else if (l.k == Val::Str) r = Val::str("");
        else return false;
    }
    if (l.k != r.k) return false;
    if (l.k == Val::Num) return numbers_equal(l.n, r.n);
    if (l.k == Val::Str) return l.s == r.s;
    return l.b == r.b;
}

inline Val compare(Ctx& c) {
    Val left = addsub(c);
    while (at(c, ">") || at(c, "<") || at(c, ">=") || at(c, "<=") || at(c, "=")) {
        std::string op = c.toks[c.pos++];
        Val right = addsub(c);
        if (left.k == Val::Err) continue;
        if (right.k == Val::Err) { left = right; continue; }
        if (op == "=") {
            left = Val::boolean(vals_equal(left, right));
            continue;
        }
        bool bad = false;
        double l = want_num(left, bad), r = want_num(right, bad);
        if (bad) { left = Val::err("EvalError"); continue; }
        if (op == ">") left = Val::boolean(l > r);
        else if (op == "<") left = Val::boolean(l < r);
        else if (op == ">=") left = Val::boolean(l >= r);
        else left = Val::boolean(l <= r);
    }
    return left;
}

inline Val eval_text(Ctx& c, const std::string& text) {
    size_t saved_pos = c.pos;
    auto saved_toks = c.toks;
    c.toks = tokenize(text);
    c.pos = 0;
    Val v = compare(c);
    if (v.k != Val::Err && c.pos != c.toks.size()) v = Val::err("EvalError");
    c.toks = std::move(saved_toks);
    c.pos = saved_pos;
    return v;
}

inline Val cell(Ctx& c, const std::string& addr) {
    auto memo = c.memo.find(addr);
    if (memo != c.memo.end()) return memo->second;
    if (c.visiting.count(addr)) return Val::err("CycleError");
    const Cell* cl = c.wb->find_cell(c.sheet, addr);
    Val v;
    if (!cl || (!cl->value && !cl->formula)) {
        v = Val{};
    } else if (cl->value) {
        if (std::holds_alternative<double>(*cl->value)) v = Val::num(std::get<double>(*cl->value));
        else if (std::holds_alternative<bool>(*cl->value)) v = Val::boolean(std::get<bool>(*cl->value));
        else v = Val::str(std::get<std::string>(*cl->value));
    } else {
        c.visiting.insert(addr);
        v = eval_text(c, *cl->formula);
        c.visiting.erase(addr);
    }
    c.memo[addr] = v;
    return v;
}

// top-level entry, mirrors EvalOutcome
inline std::pair<std::string, std::optional<Scalar>> run(const WorkbookState& wb,
                                                  const std::string& sheet,
                                                  const std::string& text) {
    Ctx c{&wb, sheet, {}, 0, {}, {}};
    Val v = eval_text(c, text);
    if (v.k == Val::Err) {
        return {v.s.rfind("RANGE@", 0) == 0 ? "EvalError" : v.s, std::nullopt};
    }
    if (v.k == Val::Num) return {"", Scalar(v.n)};
    if (v.k == Val::Str) return {"", Scalar(v.s)};
    if (v.k == Val::Bool) return {"", Scalar(v.b)};
    return {"", Scalar(0.0)};  // empty at top level is numeric
}

}  // namespace oracle

inline bool scalars_match(const Scalar& a, const Scalar& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<double>(a)) {
        return numbers_equal(std::get<double>(a), std::get<double>(b));
    }
    return a == b;
}

inline WorkbookState random_grid(Rng& rng) {
    WorkbookState wb;
    Sheet s;
    s.name = "S";
    for (char col = 'A'; col <= 'D'; ++col) {
        for (int row = 1; row <= 5; ++row) {
            std::string addr = std::string(1, col) + std::to_string(row);
            uint64_t pick = rng.below(10);
            Cell cell;
            if (pick < 5) {
                cell.value = static_cast<double>(rng.range(-20, 40));
            } else if (pick < 6) {
                cell.value = static_cast<double>(rng.range(1, 9)) / 4.0;
            } else if (pick < 7) {
                cell.value = std::string("txt");
            } else if (pick < 8) {
                cell.value = rng.below(2) == 0;
            }  // else empty
            s.cells[addr] = cell;
        }
    }
    wb.sheets.push_back(s);
    return wb;
}

inline std::string random_addr(Rng& rng) {
    return std::string(1, static_cast<char>('A' + rng.below(4))) +
           std::to_string(1 + rng.below(5));
}

inline std::string random_formula(Rng& rng, int depth) {
    uint64_t pick = rng.below(depth <= 0 ? 4 : 10);
    switch (pick) {
        case 0: return std::to_string(rng.range(-9, 99));
        case 1: return random_addr(rng);
        case 2: return rng.below(2) ? "TRUE" : "FALSE";
        case 3: return rng.below(3) == 0 ? "\"abc\"" : std::to_string(rng.range(1, 9));
        case 4: return "-" + random_formula(rng, depth - 1);
        case 5: {
            static const char* ops[] = {"+", "-", "*", "/", ">", "<", ">=", "<=", "="};
            return "(" + random_formula(rng, depth - 1) + " " + ops[rng.below(9)] + " " +
                   random_formula(rng, depth - 1) + ")";
        }
        case 6:
            return "IF(" + random_formula(rng, depth - 1) + ", " +
                   random_formula(rng, depth - 1) + ", " + random_formula(rng, depth - 1) + ")";
        case 7: {
            std::string a = random_addr(rng), b = random_addr(rng);
            return std::string(rng.below(2) ? "SUM" : "AVERAGE") + "(" + a + ":" + b + ")";
        }
        case 8:
            return std::string(rng.below(2) ? "SUM" : "AVERAGE") + "(" +
                   random_formula(rng, depth - 1) + ")";
        default:
            return random_formula(rng, depth - 1) + " + " + random_formula(rng, depth - 1);
    }
}


}  // namespace wb_testing
