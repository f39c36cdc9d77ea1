#include "worldbench/verifier.hpp"

namespace wb::verify {

namespace {

apps::AppAction act(const std::string& app, const std::string& verb,
                    std::map<std::string, Scalar> params) {
    return {app, verb, std::move(params)};
}

std::vector<apps::AppAction> vault_seed() {
    return {
        act("vault", "create_folder", {{"path", std::string("Italian")}}),
        act("vault", "create_note",
            {{"path", std::string("Italian/Carbonara.md")},
             {"body", std::string("#recipe Classic. See [[Cacio e Pepe]].")}}),
        act("vault", "set_frontmatter",
            {{"path", std::string("Italian/Carbonara.md")},
             {"key", std::string("cuisine")},
             {"value", std::string("italian")}}),
        act("vault", "create_note",
            {{"path", std::string("Index.md")}, {"body", std::string("#index [[Carbonara]]")}}),
    };
}

std::vector<apps::AppAction> workbook_seed() {
    return {
        act("workbook", "create_sheet", {{"name", std::string("Sales")}}),
        act("workbook", "set_cell",
            {{"sheet", std::string("Sales")}, {"addr", std::string("A1")},
             {"value", std::string("Header")}, {"bold", true}}),
        act("workbook", "set_cell",
            {{"sheet", std::string("Sales")}, {"addr", std::string("B1")}, {"value", 12000.0}}),
        act("workbook", "set_cell",
            {{"sheet", std::string("Sales")}, {"addr", std::string("C1")},
             {"formula", std::string("=IF(B1>20000, 0.10, IF(B1>=10000, 0.08, 0.05))")}}),
    };
}

std::vector<apps::AppAction> media_seed() {
    return {
        act("media", "import_image", {{"filename", std::string("img_001.png")}}),
        act("media", "import_image", {{"filename", std::string("img_002.png")}}),
        act("media", "create_tag", {{"name", std::string("batch_processed")}}),
        act("media", "attach_tag",
            {{"filename", std::string("img_001.png")}, {"tag", std::string("batch_processed")}}),
        act("media", "set_rating", {{"filename", std::string("img_001.png")}, {"rating", 3.0}}),
    };
}

Fixture fx(const std::string& label, const std::string& endpoint,
           std::map<std::string, std::string> args, std::vector<apps::AppAction> seed,
           bool expect_ok, std::optional<bool> expect_passed) {
    Fixture f;
    f.label = label;
    f.endpoint = endpoint;
    f.args = std::move(args);
    f.seed_actions = std::move(seed);
    f.expect_ok = expect_ok;
    f.expect_passed = expect_passed;
    return f;
}

FixturePlan vault_plan() {
    auto seed = vault_seed();
    FixturePlan p;
    p.app_id = "vault";
    p.fixtures = {
        fx("folder present", "check-folder-exists", {{"path", "Italian"}}, seed, true, true),
        fx("folder absent", "check-folder-exists", {{"path", "Asian"}}, seed, true, false),
        fx("note present", "check-note-exists", {{"path", "Italian/Carbonara.md"}}, seed, true, true),
        fx("note absent", "check-note-exists", {{"path", "Missing.md"}}, seed, true, false),
        fx("link present", "check-note-links-to",
           {{"path", "Italian/Carbonara.md"}, {"target", "Cacio e Pepe"}}, seed, true, true),
        fx("link absent", "check-note-links-to",
           {{"path", "Italian/Carbonara.md"}, {"target", "Tiramisu"}}, seed, true, false),
        fx("tag present", "check-note-has-tag",
           {{"path", "Italian/Carbonara.md"}, {"tag", "recipe"}}, seed, true, true),
        fx("tag absent", "check-note-has-tag",
           {{"path", "Italian/Carbonara.md"}, {"tag", "noodles"}}, seed, true, false),
        fx("frontmatter match", "check-frontmatter-field",
           {{"path", "Italian/Carbonara.md"}, {"key", "cuisine"}, {"value", "italian"}}, seed,
           true, true),
        fx("frontmatter mismatch", "check-frontmatter-field",
           {{"path", "Italian/Carbonara.md"}, {"key", "cuisine"}, {"value", "asian"}}, seed, true,
           false),
        fx("note count match", "check-note-count", {{"count", "2"}}, seed, true, true),
        fx("note count mismatch", "check-note-count", {{"count", "5"}}, seed, true, false),
        fx("folder count match", "check-folder-note-count",
           {{"folder", "Italian"}, {"count", "1"}}, seed, true, true),
        fx("folder count mismatch", "check-folder-note-count",
           {{"folder", "Italian"}, {"count", "3"}}, seed, true, false),
        fx("note in folder", "check-note-in-folder",
           {{"folder", "Italian"}, {"name", "Carbonara.md"}}, seed, true, true),
        fx("note not in folder", "check-note-in-folder",
           {{"folder", "Italian"}, {"name", "PadThai.md"}}, seed, true, false),
        fx("body contains", "check-body-contains",
           {{"path", "Index.md"}, {"text", "[[Carbonara]]"}}, seed, true, true),
        fx("body does not contain", "check-body-contains",
           {{"path", "Index.md"}, {"text", "tiramisu"}}, seed, true, false),
        fx("get note ok", "get-note", {{"path", "Index.md"}}, seed, true, std::nullopt),
        fx("get note missing", "get-note", {{"path", "Nope.md"}}, seed, false, std::nullopt),
        fx("vault stats", "get-vault-stats", {}, seed, true, std::nullopt),
        fx("vault stats on missing vault", "get-vault-stats", {}, {}, false, std::nullopt),
        fx("check on empty note path", "check-note-exists", {{"path", "Ghost.md"}},
           {act("vault", "create_folder", {{"path", std::string("Empty")}})}, true, false),
    };
    for (auto& f : p.fixtures) {
        if (f.label == "vault stats on missing vault") f.seed_state = false;
    }
    // nonexistent-path case (no state persisted at all)
    Fixture missing_state = fx("note check without vault", "check-note-exists",
                               {{"path", "Index.md"}}, {}, false, false);
    missing_state.seed_state = false;
    p.fixtures.push_back(missing_state);
    // missing-argument case
    Fixture noarg;
    noarg.label = "missing path argument";
    noarg.endpoint = "check-note-exists";
    noarg.seed_actions = seed;
    noarg.expect_protocol_error = true;
    p.fixtures.push_back(noarg);
    return p;
}

FixturePlan workbook_plan() {
    auto seed = workbook_seed();
    FixturePlan p;
    p.app_id = "workbook";
    p.fixtures = {
        fx("sheet present", "check-sheet-exists", {{"name", "Sales"}}, seed, true, true),
        fx("sheet absent", "check-sheet-exists", {{"name", "Summary"}}, seed, true, false),
        fx("sheet count match", "check-sheet-count", {{"count", "1"}}, seed, true, true),
        fx("sheet count mismatch", "check-sheet-count", {{"count", "4"}}, seed, true, false),
        fx("literal value match", "check-cell-value",
           {{"sheet", "Sales"}, {"addr", "B1"}, {"value", "12000"}}, seed, true, true),
        fx("literal value mismatch", "check-cell-value",
           {{"sheet", "Sales"}, {"addr", "B1"}, {"value", "99"}}, seed, true, false),
        fx("formula value match", "check-cell-value",
           {{"sheet", "Sales"}, {"addr", "C1"}, {"value", "0.08"}}, seed, true, true),
        fx("value within tolerance", "check-cell-value-within",
           {{"sheet", "Sales"}, {"addr", "C1"}, {"value", "0.081"}, {"tolerance", "0.01"}}, seed,
           true, true),
        fx("value outside tolerance", "check-cell-value-within",
           {{"sheet", "Sales"}, {"addr", "C1"}, {"value", "0.5"}, {"tolerance", "0.01"}}, seed,
           true, false),
        fx("is formula", "check-cell-is-formula", {{"sheet", "Sales"}, {"addr", "C1"}}, seed,
           true, true),
        fx("not a formula", "check-cell-is-formula", {{"sheet", "Sales"}, {"addr", "B1"}}, seed,
           true, false),
        fx("formula text match", "check-cell-formula-contains",
           {{"sheet", "Sales"}, {"addr", "C1"}, {"text", "IF("}}, seed, true, true),
        fx("formula text mismatch", "check-cell-formula-contains",
           {{"sheet", "Sales"}, {"addr", "C1"}, {"text", "SUM("}}, seed, true, false),
        fx("bold set", "check-cell-bold", {{"sheet", "Sales"}, {"addr", "A1"}}, seed, true, true),
        fx("bold unset", "check-cell-bold", {{"sheet", "Sales"}, {"addr", "B1"}}, seed, true,
           false),
        fx("cell empty", "check-cell-empty", {{"sheet", "Sales"}, {"addr", "Z9"}}, seed, true,
           true),
        fx("cell not empty", "check-cell-empty", {{"sheet", "Sales"}, {"addr", "A1"}}, seed, true,
           false),
        fx("get cell ok", "get-cell", {{"sheet", "Sales"}, {"addr", "C1"}}, seed, true,
           std::nullopt),
        fx("get cell on missing sheet", "get-cell", {{"sheet", "Nope"}, {"addr", "A1"}}, seed,
           false, std::nullopt),
        fx("sheet names", "get-sheet-names", {}, seed, true, std::nullopt),
        fx("sheet names without workbook", "get-sheet-names", {}, {}, false, std::nullopt),
    };
    p.fixtures.back().seed_state = false;
    Fixture noarg;
    noarg.label = "missing addr argument";
    noarg.endpoint = "check-cell-value";
    noarg.args = {{"sheet", "Sales"}, {"value", "1"}};
    noarg.seed_actions = seed;
    noarg.expect_protocol_error = true;
    p.fixtures.push_back(noarg);
    return p;
}

FixturePlan media_plan() {
    auto seed = media_seed();
    FixturePlan p;
    p.app_id = "media";
    p.fixtures = {
        fx("image present", "check-image-present", {{"filename", "img_001.png"}}, seed, true, true),
        fx("image absent", "check-image-present", {{"filename", "img_009.png"}}, seed, true, false),
        fx("tag exists", "check-tag-exists", {{"name", "batch_processed"}}, seed, true, true),
        fx("tag missing", "check-tag-exists", {{"name", "nonexistent"}}, seed, true, false),
        fx("image has tag", "check-image-has-tag",
           {{"filename", "img_001.png"}, {"tag", "batch_processed"}}, seed, true, true),
        fx("image lacks tag", "check-image-has-tag",
           {{"filename", "img_002.png"}, {"tag", "batch_processed"}}, seed, true, false),
        fx("rating match", "check-image-rating", {{"filename", "img_001.png"}, {"rating", "3"}},
           seed, true, true),
        fx("rating mismatch", "check-image-rating", {{"filename", "img_001.png"}, {"rating", "5"}},
           seed, true, false),
        fx("rating at least", "check-rating-at-least",
           {{"filename", "img_001.png"}, {"rating", "2"}}, seed, true, true),
        fx("rating below threshold", "check-rating-at-least",
           {{"filename", "img_002.png"}, {"rating", "1"}}, seed, true, false),
        fx("image count match", "check-image-count", {{"count", "2"}}, seed, true, true),
        fx("image count mismatch", "check-image-count", {{"count", "7"}}, seed, true, false),
        fx("tag count match", "check-tag-count", {{"count", "1"}}, seed, true, true),
        fx("tag count mismatch", "check-tag-count", {{"count", "0"}}, seed, true, false),
        fx("image tag count match", "check-image-tag-count",
           {{"filename", "img_001.png"}, {"count", "1"}}, seed, true, true),
        fx("image tag count mismatch", "check-image-tag-count",
           {{"filename", "img_001.png"}, {"count", "4"}}, seed, true, false),
        fx("image info", "get-image-info", {{"filename", "img_001.png"}}, seed, true,
           std::nullopt),
        fx("image info missing image", "get-image-info", {{"filename", "img_404.png"}}, seed,
           false, std::nullopt),
        fx("tag list", "get-tag-list", {}, seed, true, std::nullopt),
        fx("library stats", "get-library-stats", {}, seed, true, std::nullopt),
        fx("tag list without stores", "get-tag-list", {}, {}, false, std::nullopt),
        fx("stats without stores", "get-library-stats", {}, {}, false, std::nullopt),
    };
    p.fixtures[p.fixtures.size() - 2].seed_state = false;
    p.fixtures[p.fixtures.size() - 1].seed_state = false;
    Fixture noarg;
    noarg.label = "missing filename argument";
    noarg.endpoint = "check-image-rating";
    noarg.args = {{"rating", "3"}};
    noarg.seed_actions = seed;
    noarg.expect_protocol_error = true;
    p.fixtures.push_back(noarg);
    return p;
}

}  // namespace

FixturePlan shipped_fixture_plan(const std::string& app_id) {
    if (app_id == "vault") return vault_plan();
    if (app_id == "workbook") return workbook_plan();
    if (app_id == "media") return media_plan();
    throw Error("UnknownApp", "no fixture plan for app '" + app_id + "'");
}

}  // namespace wb::verify
