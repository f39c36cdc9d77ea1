#include "worldbench/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace fs = std::filesystem;

namespace wb::verify {

namespace {

using apps::TableStore;

EndpointParam req(std::string name, std::string type = "string") {
    return {std::move(name), std::move(type), true};
}

std::vector<EndpointSpec> vault_endpoints() {
    return {
        {"check-folder-exists", {req("path")}, "folder present at the given vault path", {"vault.root"}},
        {"check-note-exists", {req("path")}, "note present at the given vault path", {"vault.root"}},
        {"check-note-links-to", {req("path"), req("target")}, "note contains a [[target]] link", {"vault.root"}},
        {"check-note-has-tag", {req("path"), req("tag")}, "note body carries the #tag", {"vault.root"}},
        {"check-frontmatter-field", {req("path"), req("key"), req("value")}, "frontmatter key equals value", {"vault.root"}},
        {"check-note-count", {req("count", "int")}, "total notes in the vault equals count", {"vault.root", "count.offset"}},
        {"check-folder-note-count", {req("folder"), req("count", "int")}, "notes directly inside folder equals count", {"vault.root", "count.offset"}},
        {"check-note-in-folder", {req("folder"), req("name")}, "note name exists directly inside folder", {"vault.root"}},
        {"check-body-contains", {req("path"), req("text")}, "note body contains the literal text", {"vault.root"}},
        {"get-note", {req("path")}, "body, frontmatter, tags and links of a note", {"vault.root"}},
        {"get-vault-stats", {}, "note/folder counts and folder list", {"vault.root"}},
    };
}

std::vector<EndpointSpec> workbook_endpoints() {
    return {
        {"check-sheet-exists", {req("name")}, "sheet with the given name exists", {"workbook.path"}},
        {"check-sheet-count", {req("count", "int")}, "number of sheets equals count", {"workbook.path", "count.offset"}},
        {"check-cell-value", {req("sheet"), req("addr"), req("value")}, "displayed cell value (literal or evaluated) equals value", {"workbook.path"}},
        {"check-cell-value-within", {req("sheet"), req("addr"), req("value"), req("tolerance")}, "numeric cell value within tolerance of value", {"workbook.path"}},
        {"check-cell-is-formula", {req("sheet"), req("addr")}, "cell holds a formula", {"workbook.path"}},
        {"check-cell-formula-contains", {req("sheet"), req("addr"), req("text")}, "formula source contains the literal text", {"workbook.path"}},
        {"check-cell-bold", {req("sheet"), req("addr")}, "cell carries the bold style flag", {"workbook.path"}},
        {"check-cell-empty", {req("sheet"), req("addr")}, "cell holds neither value nor formula", {"workbook.path"}},
        {"get-cell", {req("sheet"), req("addr")}, "cell kind, raw content and evaluated value", {"workbook.path"}},
        {"get-sheet-names", {}, "ordered sheet names", {"workbook.path"}},
    };
}

std::vector<EndpointSpec> media_endpoints() {
    return {
        {"check-image-present", {req("filename")}, "image row exists", {"table.images"}},
        {"check-tag-exists", {req("name")}, "tag row with the given name exists", {"table.tags"}},
        {"check-image-has-tag", {req("filename"), req("tag")}, "image-tag association exists", {"table.images", "table.tagged_images", "table.tags", "join.image_tag"}},
        {"check-image-rating", {req("filename"), req("rating", "int")}, "image rating equals the given value", {"table.images", "column.images.rating", "compare.rating.mode"}},
        {"check-rating-at-least", {req("filename"), req("rating", "int")}, "image rating is at least the given value", {"table.images", "column.images.rating"}},
        {"check-image-count", {req("count", "int")}, "number of imported images equals count", {"table.images", "count.offset"}},
        {"check-tag-count", {req("count", "int")}, "number of tags equals count", {"table.tags", "count.offset"}},
        {"check-image-tag-count", {req("filename"), req("count", "int")}, "number of tags attached to the image equals count", {"table.images", "table.tagged_images", "table.tags", "join.image_tag", "count.offset"}},
        {"get-image-info", {req("filename")}, "rating and tags of an image", {"table.images", "table.tagged_images", "table.tags", "join.image_tag"}},
        {"get-tag-list", {}, "all tag names", {"table.tags"}},
        {"get-library-stats", {}, "image/tag counts and schema version", {"table.images", "table.tags"}},
    };
}

// Verifier-side state access. Everything flows through cfg.bindings; a wrong
// binding surfaces as a MissingState/MissingTable/MissingColumn execution
// error or as wrong evidence, exactly the failure classes the evolution loop
// diagnoses.
struct MediaView {
    TableStore library;
    TableStore data;

    const TableStore& store(const std::string& name) const {
        if (name == "library") return library;
        if (name == "data") return data;
        throw Error("InvalidBinding", "unknown store '" + name + "'");
    }
};

MediaView load_media_view(const VerifierConfig& cfg, const std::string& root) {
    auto read_store = [&](const std::string& binding) {
        std::string rel = cfg.bindings.at(binding);
        fs::path p = fs::path(root) / rel;
        if (!fs::exists(p)) throw Error("MissingState", "missing store file " + rel);
        try {
            return apps::table_store_from_json(Json::parse(read_file(p.string())), rel);
        } catch (const Json::parse_error& e) {
            throw Error("MalformedState", rel + ": " + e.what());
        }
    };
    return {read_store("store.library.path"), read_store("store.data.path")};
}

const std::vector<Json>& bound_table(const MediaView& view, const VerifierConfig& cfg,
                                     const std::string& table) {
    const std::string& store_name = cfg.bindings.at("table." + table + ".store");
    return view.store(store_name).table(table);
}

int64_t row_column_int(const Json& row, const std::string& column, const std::string& table) {
    if (!row.contains(column)) {
        throw Error("MissingColumn", "missing column: " + column + " on table " + table);
    }
    return row[column].get<int64_t>();
}

int count_offset(const VerifierConfig& cfg) {
    auto it = cfg.bindings.find("count.offset");
    return it == cfg.bindings.end() ? 0 : std::stoi(it->second);
}

int arg_int(const std::map<std::string, std::string>& args, const std::string& key) {
    try {
        return std::stoi(args.at(key));
    } catch (const std::invalid_argument&) {
        throw Error("InvalidParams", "argument '" + key + "' must be an integer");
    }
}

bool scalar_text_equal(const std::string& a, const std::string& b) {
    // numeric-aware comparison on canonical form
    try {
        size_t ia = 0, ib = 0;
        double da = std::stod(a, &ia);
        double db = std::stod(b, &ib);
        if (ia == a.size() && ib == b.size()) return numbers_equal(da, db);
    } catch (...) {
    }
    return a == b;
}

// --- per-app handlers. Return passed (or nullopt for queries), fill evidence.

std::optional<bool> handle_vault(const VerifierConfig& cfg, const std::string& endpoint,
                                 const std::map<std::string, std::string>& args,
                                 const std::string& root, Json& ev) {
    apps::VaultState v =
        apps::load_vault_dir((fs::path(root) / cfg.bindings.at("vault.root")).string());
    if (endpoint == "check-folder-exists") {
        bool hit = v.folder_exists(args.at("path"));
        ev["exists"] = hit;
        return hit;
    }
    if (endpoint == "check-note-exists") {
        bool hit = v.find_note(args.at("path")) != nullptr;
        ev["exists"] = hit;
        return hit;
    }
    if (endpoint == "check-note-links-to" || endpoint == "check-note-has-tag" ||
        endpoint == "check-frontmatter-field" || endpoint == "check-body-contains" ||
        endpoint == "get-note") {
        const apps::Note* note = v.find_note(args.at("path"));
        if (!note) throw Error("NotFound", "note not found: " + args.at("path"));
        ev["tags"] = std::vector<std::string>(note->tags.begin(), note->tags.end());
        ev["links"] = std::vector<std::string>(note->links.begin(), note->links.end());
        if (endpoint == "get-note") {
            Json fm = Json::object();
            for (const auto& [k, val] : note->frontmatter) fm[k] = val;
            ev["body"] = note->body;
            ev["frontmatter"] = fm;
            return std::nullopt;
        }
        if (endpoint == "check-note-links-to") return note->links.count(args.at("target")) > 0;
        if (endpoint == "check-note-has-tag") return note->tags.count(args.at("tag")) > 0;
        if (endpoint == "check-body-contains") {
            return note->body.find(args.at("text")) != std::string::npos;
        }
        auto it = note->frontmatter.find(args.at("key"));
        ev["actual"] = it == note->frontmatter.end() ? Json(nullptr) : Json(it->second);
        return it != note->frontmatter.end() && scalar_text_equal(it->second, args.at("value"));
    }
    if (endpoint == "check-note-count") {
        int reported = v.note_count() + count_offset(cfg);
        ev["count"] = reported;
        return reported == arg_int(args, "count");
    }
    if (endpoint == "check-folder-note-count" || endpoint == "check-note-in-folder") {
        const std::string& folder = args.at("folder");
        if (!v.folder_exists(folder)) throw Error("NotFound", "folder not found: " + folder);
        const apps::VaultFolder* cur = &v.root;
        std::stringstream ss(folder);
        std::string part;
        while (std::getline(ss, part, '/')) {
            if (!part.empty()) cur = &cur->folders.at(part);
        }
        if (endpoint == "check-note-in-folder") {
            bool hit = cur->notes.count(args.at("name")) > 0;
            ev["exists"] = hit;
            return hit;
        }
        int reported = static_cast<int>(cur->notes.size()) + count_offset(cfg);
        ev["count"] = reported;
        return reported == arg_int(args, "count");
    }
    // get-vault-stats
    std::vector<std::string> folders;
    std::function<void(const apps::VaultFolder&, std::string)> walk =
        [&](const apps::VaultFolder& f, std::string prefix) {
            for (const auto& [name, sub] : f.folders) {
                folders.push_back(prefix + name);
                walk(sub, prefix + name + "/");
            }
        };
    walk(v.root, "");
    ev["note_count"] = v.note_count();
    ev["folder_count"] = v.folder_count();
    ev["folders"] = folders;
    return std::nullopt;
}

std::optional<bool> handle_workbook(const VerifierConfig& cfg, const std::string& endpoint,
                                    const std::map<std::string, std::string>& args,
                                    const std::string& root, Json& ev) {
    fs::path file = fs::path(root) / cfg.bindings.at("workbook.path");
    if (!fs::exists(file)) throw Error("MissingState", "workbook not found at " + file.string());
    apps::WorkbookState w;
    try {
        w = apps::workbook_from_json(Json::parse(read_file(file.string())));
    } catch (const Json::parse_error& e) {
        throw Error("MalformedState", file.string() + ": " + e.what());
    }
    if (endpoint == "check-sheet-exists") {
        bool hit = w.find_sheet(args.at("name")) != nullptr;
        ev["exists"] = hit;
        return hit;
    }
    if (endpoint == "check-sheet-count") {
        int reported = static_cast<int>(w.sheets.size()) + count_offset(cfg);
        ev["count"] = reported;
        return reported == arg_int(args, "count");
    }
    if (endpoint == "get-sheet-names") {
        std::vector<std::string> names;
        for (const auto& s : w.sheets) names.push_back(s.name);
        ev["sheets"] = names;
        return std::nullopt;
    }
    const std::string& sheet = args.at("sheet");
    const std::string& addr = args.at("addr");
    if (!w.find_sheet(sheet)) throw Error("NotFound", "no such sheet: " + sheet);
    const apps::Cell* cell = w.find_cell(sheet, addr);
    auto displayed = [&]() -> Json {
        if (!cell) return nullptr;
        if (cell->formula) {
            apps::EvalOutcome out = apps::eval_formula(w, sheet, addr);
            if (!out.ok()) {
                throw Error(out.error_class, "evaluating " + addr + ": " + out.error_message);
            }
            return scalar_to_json(*out.value);
        }
        if (cell->value) return scalar_to_json(*cell->value);
        return nullptr;
    };
    if (endpoint == "check-cell-empty") {
        bool empty = !cell || (!cell->value && !cell->formula);
        ev["empty"] = empty;
        return empty;
    }
    if (endpoint == "check-cell-is-formula") {
        bool hit = cell && cell->formula.has_value();
        ev["is_formula"] = hit;
        return hit;
    }
    if (endpoint == "check-cell-formula-contains") {
        std::string src = cell && cell->formula ? *cell->formula : "";
        ev["formula"] = src;
        return !src.empty() && src.find(args.at("text")) != std::string::npos;
    }
    if (endpoint == "check-cell-bold") {
        bool hit = cell && cell->bold;
        ev["bold"] = hit;
        return hit;
    }
    if (endpoint == "check-cell-value") {
        Json got = displayed();
        ev["value"] = got;
        if (got.is_null()) return false;
        std::string got_text = got.is_string() ? got.get<std::string>()
                                               : scalar_to_string(scalar_from_json(got));
        return scalar_text_equal(got_text, args.at("value"));
    }
    if (endpoint == "check-cell-value-within") {
        Json got = displayed();
        ev["value"] = got;
        if (!got.is_number()) return false;
        double want = std::stod(args.at("value"));
        double tol = std::stod(args.at("tolerance"));
        return std::abs(got.get<double>() - want) <= tol;
    }
    // get-cell
    ev["kind"] = !cell || (!cell->value && !cell->formula) ? "empty"
                 : cell->formula                           ? "formula"
                                                           : "literal";
    ev["bold"] = cell && cell->bold;
    if (cell && cell->formula) ev["formula"] = *cell->formula;
    ev["value"] = displayed();
    return std::nullopt;
}

std::optional<bool> handle_media(const VerifierConfig& cfg, const std::string& endpoint,
                                 const std::map<std::string, std::string>& args,
                                 const std::string& root, Json& ev) {
    MediaView view = load_media_view(cfg, root);

    auto find_image = [&](const std::string& filename) -> const Json* {
        for (const auto& row : bound_table(view, cfg, "images")) {
            if (row.value("filename", "") == filename) return &row;
        }
        return nullptr;
    };

    // join tagged_images -> tags according to the bound join path
    auto tags_of_image = [&](int64_t imgid) {
        const std::string& join = cfg.bindings.at("join.image_tag");
        size_t arrow = join.find("->");
        if (arrow == std::string::npos) throw Error("InvalidBinding", "bad join path: " + join);
        std::string left = join.substr(0, arrow);
        std::string right = join.substr(arrow + 2);
        std::string left_key = left.substr(left.find('.') + 1);
        std::string right_key = right.substr(right.find('.') + 1);
        std::vector<std::string> out;
        for (const auto& ti : bound_table(view, cfg, "tagged_images")) {
            if (row_column_int(ti, "imgid", "tagged_images") != imgid) continue;
            int64_t link = row_column_int(ti, left_key, "tagged_images");
            for (const auto& tag : bound_table(view, cfg, "tags")) {
                if (row_column_int(tag, right_key, "tags") == link) {
                    out.push_back(tag.value("name", ""));
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };

    if (endpoint == "check-image-present") {
        bool hit = find_image(args.at("filename")) != nullptr;
        ev["present"] = hit;
        return hit;
    }
    if (endpoint == "check-tag-exists") {
        bool hit = false;
        for (const auto& row : bound_table(view, cfg, "tags")) {
            if (row.value("name", "") == args.at("name")) hit = true;
        }
        ev["exists"] = hit;
        return hit;
    }
    if (endpoint == "check-tag-count") {
        int reported = static_cast<int>(bound_table(view, cfg, "tags").size()) +
                       count_offset(cfg);
        ev["count"] = reported;
        return reported == arg_int(args, "count");
    }
    if (endpoint == "check-image-count") {
        int reported = static_cast<int>(bound_table(view, cfg, "images").size()) +
                       count_offset(cfg);
        ev["count"] = reported;
        return reported == arg_int(args, "count");
    }
    if (endpoint == "get-tag-list") {
        std::vector<std::string> names;
        for (const auto& row : bound_table(view, cfg, "tags")) {
            names.push_back(row.value("name", ""));
        }
        std::sort(names.begin(), names.end());
        ev["tags"] = names;
        return std::nullopt;
    }
    if (endpoint == "get-library-stats") {
        ev["images"] = bound_table(view, cfg, "images").size();
        ev["tags"] = bound_table(view, cfg, "tags").size();
        ev["schema_version"] = view.library.schema_version;
        return std::nullopt;
    }
    // all remaining endpoints address a single image
    const Json* img = find_image(args.at("filename"));
    if (!img) throw Error("NotFound", "image not found: " + args.at("filename"));
    int64_t imgid = row_column_int(*img, "id", "images");
    if (endpoint == "check-image-rating" || endpoint == "check-rating-at-least") {
        const std::string& col = cfg.bindings.at("column.images.rating");
        int64_t rating = row_column_int(*img, col, "images");
        ev["rating"] = rating;
        int want = arg_int(args, "rating");
        if (endpoint == "check-rating-at-least") return rating >= want;
        bool eq = rating == want;
        auto mode = cfg.bindings.find("compare.rating.mode");
        if (mode != cfg.bindings.end() && mode->second == "inverted") eq = !eq;
        return eq;
    }
    std::vector<std::string> tags = tags_of_image(imgid);
    if (endpoint == "check-image-has-tag") {
        ev["tags"] = tags;
        return std::find(tags.begin(), tags.end(), args.at("tag")) != tags.end();
    }
    if (endpoint == "check-image-tag-count") {
        int reported = static_cast<int>(tags.size()) + count_offset(cfg);
        ev["count"] = reported;
        return reported == arg_int(args, "count");
    }
    // get-image-info
    ev["rating"] = row_column_int(*img, cfg.bindings.at("column.images.rating"), "images");
    ev["tags"] = tags;
    return std::nullopt;
}

VerdictRecord invoke(const VerifierConfig& cfg, const std::string& endpoint,
                     const std::map<std::string, std::string>& args,
                     const std::string& sandbox_root) {
    const EndpointSpec* spec = find_endpoint(cfg.app_id, endpoint);
    if (!spec) {
        throw Error("UnknownEndpoint", "app '" + cfg.app_id + "' has no endpoint '" + endpoint + "'");
    }
    for (const auto& p : spec->params) {
        if (p.required && !args.count(p.name)) {
            throw Error("MissingArgument", endpoint + " requires --" + p.name);
        }
    }
    VerdictRecord v;
    v.endpoint = endpoint;
    v.revision = cfg.revision;
    Json used = Json::object();
    for (const auto& resource : spec->reads) {
        // table.* resources resolve through their .store binding
        for (const auto& [key, location] : cfg.bindings) {
            if (key == resource || key.rfind(resource + ".", 0) == 0) used[key] = location;
        }
    }
    v.bindings_used = used;
    v.evidence["bindings"] = used;
    try {
        std::optional<bool> passed;
        if (cfg.app_id == "vault") {
            passed = handle_vault(cfg, endpoint, args, sandbox_root, v.evidence);
        } else if (cfg.app_id == "workbook") {
            passed = handle_workbook(cfg, endpoint, args, sandbox_root, v.evidence);
        } else if (cfg.app_id == "media") {
            passed = handle_media(cfg, endpoint, args, sandbox_root, v.evidence);
        } else {
            throw Error("UnknownApp", "no verifier for app '" + cfg.app_id + "'");
        }
        v.ok = true;
        v.passed = passed;
    } catch (const Error& e) {
        if (std::string(e.kind()) == "UnknownApp") throw;
        v.ok = false;
        v.passed = spec->is_check() ? std::optional<bool>(false) : std::nullopt;
        v.error = e.what();
    }
    return v;
}

}  // namespace

Json VerifierConfig::to_json() const {
    Json b = Json::object();
    for (const auto& [k, v] : bindings) b[k] = v;
    return Json{{"app_id", app_id}, {"revision", revision}, {"bindings", b}};
}

VerifierConfig VerifierConfig::from_json(const Json& j) {
    VerifierConfig c;
    c.app_id = j.at("app_id").get<std::string>();
    c.revision = j.at("revision").get<int>();
    for (const auto& [k, v] : j.at("bindings").items()) c.bindings[k] = v.get<std::string>();
    return c;
}

VerifierConfig VerifierConfig::load(const std::string& path) {
    try {
        return from_json(Json::parse(read_file(path)));
    } catch (const Json::exception& e) {
        throw Error("MalformedDocument", path + ": " + e.what());
    }
}

void VerifierConfig::save(const std::string& path) const {
    write_file(path, to_json().dump(2) + "\n");
}

VerifierConfig default_config(const std::string& app_id) {
    VerifierConfig c;
    c.app_id = app_id;
    c.revision = 0;
    if (app_id == "vault") {
        c.bindings = {{"vault.root", "vault"}, {"count.offset", "0"}};
    } else if (app_id == "workbook") {
        c.bindings = {{"workbook.path", "workbook.json"}, {"count.offset", "0"}};
    } else if (app_id == "media") {
        c.bindings = {{"store.library.path", "library.store"},
                      {"store.data.path", "data.store"},
                      {"table.images.store", "library"},
                      {"table.tags.store", "data"},
                      {"table.tagged_images.store", "library"},
                      {"join.image_tag", "tagged_images.tagid->tags.id"},
                      {"column.images.rating", "rating"},
                      {"compare.rating.mode", "eq"},
                      {"count.offset", "0"}};
    } else {
        throw Error("UnknownApp", "no verifier for app '" + app_id + "'");
    }
    return c;
}

VerifierConfig media_v1_config() {
    VerifierConfig c = default_config("media");
    c.bindings["table.tags.store"] = "library";
    return c;
}

Json VerdictRecord::to_json() const {
    return Json{{"criterion_id", criterion_id},
                {"endpoint", endpoint},
                {"ok", ok},
                {"passed", passed ? Json(*passed) : Json(nullptr)},
                {"evidence", evidence},
                {"error", error.empty() ? Json(nullptr) : Json(error)},
                {"bindings", bindings_used},
                {"revision", revision}};
}

VerdictRecord VerdictRecord::from_json(const Json& j) {
    VerdictRecord v;
    v.criterion_id = j.value("criterion_id", "");
    v.endpoint = j.at("endpoint").get<std::string>();
    v.ok = j.at("ok").get<bool>();
    if (!j.at("passed").is_null()) v.passed = j["passed"].get<bool>();
    v.evidence = j.value("evidence", Json::object());
    if (j.contains("error") && !j["error"].is_null()) v.error = j["error"].get<std::string>();
    v.bindings_used = j.value("bindings", Json::object());
    v.revision = j.value("revision", 0);
    return v;
}

bool verdict_schema_valid(const Json& j, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!j.is_object()) return fail("verdict must be an object");
    for (const char* key : {"endpoint", "ok", "passed", "evidence", "error", "bindings", "revision"}) {
        if (!j.contains(key)) return fail(std::string("missing key '") + key + "'");
    }
    if (!j["endpoint"].is_string()) return fail("endpoint must be a string");
    if (!j["ok"].is_boolean()) return fail("ok must be a boolean");
    if (!j["passed"].is_boolean() && !j["passed"].is_null()) return fail("passed must be bool|null");
    if (!j["evidence"].is_object()) return fail("evidence must be an object");
    if (!j["error"].is_string() && !j["error"].is_null()) return fail("error must be string|null");
    if (!j["bindings"].is_object()) return fail("bindings must be an object");
    if (!j["revision"].is_number_integer()) return fail("revision must be an integer");
    bool ok = j["ok"].get<bool>();
    if (!ok && (j["error"].is_null() || j["error"].get<std::string>().empty())) {
        return fail("ok=false requires a non-empty error");
    }
    if (!ok && j["passed"].is_boolean() && j["passed"].get<bool>()) {
        return fail("ok=false requires passed=false");
    }
    return true;
}

std::vector<EndpointSpec> list_endpoints(const std::string& app_id) {
    if (app_id == "vault") return vault_endpoints();
    if (app_id == "workbook") return workbook_endpoints();
    if (app_id == "media") return media_endpoints();
    throw Error("UnknownApp", "no verifier for app '" + app_id + "'");
}

std::vector<task::EndpointSummary> endpoint_summaries(const std::string& app_id) {
    std::vector<task::EndpointSummary> out;
    for (const auto& e : list_endpoints(app_id)) {
        task::EndpointSummary s;
        s.name = e.name;
        for (const auto& p : e.params) {
            s.all_params.push_back(p.name);
            if (p.required) s.required_params.push_back(p.name);
        }
        out.push_back(std::move(s));
    }
    return out;
}

const EndpointSpec* find_endpoint(const std::string& app_id, const std::string& name) {
    static std::map<std::string, std::vector<EndpointSpec>> cache;
    auto it = cache.find(app_id);
    if (it == cache.end()) it = cache.emplace(app_id, list_endpoints(app_id)).first;
    for (const auto& e : it->second) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

VerdictRecord run_check(const VerifierConfig& cfg, const std::string& endpoint,
                        const std::map<std::string, std::string>& args,
                        const std::string& sandbox_root) {
    return invoke(cfg, endpoint, args, sandbox_root);
}

VerdictRecord run_query(const VerifierConfig& cfg, const std::string& endpoint,
                        const std::map<std::string, std::string>& args,
                        const std::string& sandbox_root) {
    return invoke(cfg, endpoint, args, sandbox_root);
}

std::vector<VerdictRecord> run_check_suite(const VerifierConfig& cfg, const task::TaskInstance& t,
                                           const std::string& sandbox_root) {
    std::vector<VerdictRecord> out;
    for (const auto& c : t.criteria) {
        std::map<std::string, std::string> args(c.args.begin(), c.args.end());
        VerdictRecord v;
        try {
            v = invoke(cfg, c.endpoint, args, sandbox_root);
        } catch (const Error& e) {
            // protocol errors become per-criterion failures; the suite goes on
            v.endpoint = c.endpoint;
            v.revision = cfg.revision;
            v.ok = false;
            v.passed = false;
            v.error = e.what();
        }
        v.criterion_id = c.criterion_id;
        if (v.ok && c.expect) {
            std::string why;
            bool hit = task::expect_matches(*c.expect, v.evidence, &why);
            if (v.passed.has_value()) {
                v.passed = *v.passed && hit;
            } else {
                v.passed = hit;
            }
            if (!hit) v.evidence["expect_failure"] = why;
        } else if (v.ok && !v.passed.has_value()) {
            // query endpoint without predicate never passes on its own
            v.passed = false;
            v.evidence["expect_failure"] = "query criterion lacks expect predicate";
        }
        out.push_back(std::move(v));
    }
    return out;
}

task::RewardReport reward_from_verdicts(const std::vector<VerdictRecord>& verdicts) {
    std::vector<task::VerdictLite> lite;
    for (const auto& v : verdicts) {
        lite.push_back({v.criterion_id, v.effective_passed(), v.evidence});
    }
    return task::compute_reward(lite);
}

// --- selftest ----------------------------------------------------------------

SelftestReport run_verifier_selftest(const VerifierConfig& cfg, const FixturePlan& plan,
                                     const std::string& scratch_dir) {
    SelftestReport report;
    report.app_id = plan.app_id;

    // coverage gate: every endpoint needs a positive and a negative fixture
    for (const auto& spec : list_endpoints(plan.app_id)) {
        bool pos = false, neg = false;
        for (const auto& f : plan.fixtures) {
            if (f.endpoint != spec.name || f.expect_protocol_error) continue;
            bool positive = spec.is_check() ? f.expect_passed == std::optional<bool>(true)
                                            : f.expect_ok;
            if (positive) pos = true;
            else neg = true;
        }
        if (!pos) report.coverage_gaps.push_back(spec.name + ": no positive fixture");
        if (!neg) report.coverage_gaps.push_back(spec.name + ": no negative fixture");
    }
    if (!report.coverage_gaps.empty()) {
        report.gated = false;
        return report;
    }

    int index = 0;
    for (const auto& f : plan.fixtures) {
        SelftestEntry entry;
        entry.label = f.label;
        entry.endpoint = f.endpoint;
        fs::path box = fs::path(scratch_dir) / ("fixture_" + std::to_string(index++));
        fs::remove_all(box);
        fs::create_directories(box);
        if (f.seed_state) {
            apps::AppState state = apps::empty_state(plan.app_id);
            for (const auto& a : f.seed_actions) state = apps::apply_action(state, a);
            apps::persist_app_state(state, box.string());
        }
        try {
            VerdictRecord v = run_check(cfg, f.endpoint, f.args, box.string());
            if (f.expect_protocol_error) {
                entry.detail = "expected protocol error, got verdict";
            } else if (v.ok != f.expect_ok) {
                entry.detail = "ok=" + std::string(v.ok ? "true" : "false") + " expected " +
                               (f.expect_ok ? "true" : "false") +
                               (v.error.empty() ? "" : " (" + v.error + ")");
            } else if (f.expect_passed && v.passed != f.expect_passed) {
                entry.detail = "passed mismatch";
            } else {
                std::string why;
                if (!verdict_schema_valid(v.to_json(), &why)) {
                    entry.detail = "verdict schema invalid: " + why;
                } else {
                    entry.matched = true;
                }
            }
        } catch (const Error& e) {
            if (f.expect_protocol_error &&
                (e.kind() == "UnknownEndpoint" || e.kind() == "MissingArgument")) {
                entry.matched = true;
            } else {
                entry.detail = std::string("unexpected error: ") + e.what();
            }
        }
        report.entries.push_back(std::move(entry));
    }
    report.gated = std::all_of(report.entries.begin(), report.entries.end(),
                               [](const SelftestEntry& e) { return e.matched; });
    return report;
}

Json SelftestReport::to_json() const {
    Json entries_json = Json::array();
    for (const auto& e : entries) {
        entries_json.push_back(Json{{"label", e.label},
                                    {"endpoint", e.endpoint},
                                    {"matched", e.matched},
                                    {"detail", e.detail}});
    }
    return Json{{"app_id", app_id},
                {"gated", gated},
                {"coverage_gaps", coverage_gaps},
                {"fixtures", entries_json}};
}

}  // namespace wb::verify
