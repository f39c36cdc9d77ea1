#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "worldbench/common.hpp"

namespace wb::apps {

struct Cell {
    std::optional<Scalar> value;      // literal, exclusive with formula
    std::optional<std::string> formula;  // source text, starts with '='
    bool bold = false;
};

struct Sheet {
    std::string name;
    std::map<std::string, Cell> cells;  // A1-style address -> cell
};

struct WorkbookState {
    std::vector<Sheet> sheets;

    Json to_canonical_json() const;
    const Sheet* find_sheet(const std::string& name) const;
    Sheet* find_sheet(const std::string& name);
    const Cell* find_cell(const std::string& sheet, const std::string& addr) const;
};

bool valid_address(const std::string& addr);

// Formula evaluation result. Errors are values, not exceptions: a cell whose
// formula divides by zero yields {error_class: "EvalError"}, the process keeps
// going.
//
// Semantics (shared contract with the test-side oracle):
//  * grammar: literals (number, "string", TRUE/FALSE), A1 refs, rectangular
//    ranges inside SUM/AVERAGE, IF(c,a,b), binary + - * / > < >= <= =,
//    parentheses, unary minus; * / bind tighter than + -, comparisons loosest,
//    all binary ops left-associative.
//  * empty cell: 0 in numeric context, "" in string context.
//  * arithmetic and ordering comparisons require numbers (empty coerces to 0);
//    anything else is EvalError ("type mismatch").
//  * `=` compares same-kind values; mixed kinds compare false after coercing
//    empties; it never errors.
//  * IF condition: bool, or number (nonzero is true); string is EvalError.
//  * SUM/AVERAGE skip non-numeric cells; AVERAGE over zero numeric cells is
//    EvalError ("division by zero"), as is `/ 0`.
//  * a reference to an erroring formula propagates that error class.
struct EvalOutcome {
    std::optional<Scalar> value;       // set iff no error
    std::string error_class;           // "", "EvalError" or "CycleError"
    std::string error_message;

    bool ok() const { return error_class.empty(); }
};

EvalOutcome eval_formula(const WorkbookState& wb, const std::string& sheet,
                         const std::string& addr);
EvalOutcome eval_formula_text(const WorkbookState& wb, const std::string& sheet,
                              const std::string& text);

// Static dependency extraction for the acyclicity invariant.
std::vector<std::string> formula_refs(const std::string& text);
bool formula_parses(const std::string& text, std::string* error);
// True if setting `addr` on `sheet` to `text` would create a reference cycle.
bool would_create_cycle(const WorkbookState& wb, const std::string& sheet,
                        const std::string& addr, const std::string& text);

inline constexpr const char* kWorkbookFile = "workbook.json";

void persist_workbook(const WorkbookState& s, const std::string& sandbox_root,
                      std::vector<std::string>* written);
WorkbookState load_workbook(const std::string& sandbox_root);
WorkbookState workbook_from_json(const Json& j);
Json workbook_to_json(const WorkbookState& s);

}  // namespace wb::apps
