#include "worldbench/apps/app_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wb::apps {

namespace {

const std::vector<std::string> kApps = {"vault", "workbook", "media"};

std::string need_string(const AppAction& a, const std::string& key) {
    auto it = a.params.find(key);
    if (it == a.params.end()) {
        throw Error("InvalidParams", a.verb + " requires param '" + key + "'");
    }
    return scalar_to_string(it->second);
}

double need_number(const AppAction& a, const std::string& key) {
    auto it = a.params.find(key);
    if (it == a.params.end()) {
        throw Error("InvalidParams", a.verb + " requires param '" + key + "'");
    }
    if (std::holds_alternative<double>(it->second)) return std::get<double>(it->second);
    if (std::holds_alternative<std::string>(it->second)) {
        try {
            return std::stod(std::get<std::string>(it->second));
        } catch (...) {
        }
    }
    throw Error("InvalidParams", a.verb + ": param '" + key + "' must be numeric");
}

Scalar need_scalar(const AppAction& a, const std::string& key) {
    auto it = a.params.find(key);
    if (it == a.params.end()) {
        throw Error("InvalidParams", a.verb + " requires param '" + key + "'");
    }
    return it->second;
}

std::vector<std::string> split_note_path(const std::string& rel) {
    std::vector<std::string> parts;
    std::stringstream ss(rel);
    std::string part;
    while (std::getline(ss, part, '/')) {
        if (part == "..") throw Error("InvalidParams", "path traversal in note path");
        if (!part.empty()) parts.push_back(part);
    }
    if (parts.empty()) throw Error("InvalidParams", "empty path");
    return parts;
}

VaultFolder& dig_folder(VaultState& s, const std::vector<std::string>& parts, size_t upto,
                        bool create) {
    VaultFolder* cur = &s.root;
    for (size_t i = 0; i < upto; ++i) {
        auto it = cur->folders.find(parts[i]);
        if (it == cur->folders.end()) {
            if (!create) throw Error("DomainViolation", "no such folder: " + parts[i]);
            it = cur->folders.emplace(parts[i], VaultFolder{}).first;
        }
        cur = &it->second;
    }
    return *cur;
}

VaultState apply_vault(VaultState s, const AppAction& a) {
    if (a.verb == "create_folder") {
        auto parts = split_note_path(need_string(a, "path"));
        dig_folder(s, parts, parts.size(), true);
        return s;
    }
    if (a.verb == "create_note") {
        auto parts = split_note_path(need_string(a, "path"));
        VaultFolder& f = dig_folder(s, parts, parts.size() - 1, true);
        if (f.notes.count(parts.back())) {
            throw Error("DomainViolation", "note already exists: " + parts.back());
        }
        Note note;
        auto body = a.params.find("body");
        if (body != a.params.end()) note.body = scalar_to_string(body->second);
        note.recompute_derived();
        f.notes[parts.back()] = std::move(note);
        return s;
    }
    if (a.verb == "set_frontmatter") {
        auto parts = split_note_path(need_string(a, "path"));
        VaultFolder& f = dig_folder(s, parts, parts.size() - 1, false);
        auto it = f.notes.find(parts.back());
        if (it == f.notes.end()) throw Error("DomainViolation", "no such note: " + parts.back());
        it->second.frontmatter[need_string(a, "key")] = need_string(a, "value");
        return s;
    }
    if (a.verb == "append_body") {
        auto parts = split_note_path(need_string(a, "path"));
        VaultFolder& f = dig_folder(s, parts, parts.size() - 1, false);
        auto it = f.notes.find(parts.back());
        if (it == f.notes.end()) throw Error("DomainViolation", "no such note: " + parts.back());
        it->second.body += need_string(a, "text");
        it->second.recompute_derived();
        return s;
    }
    if (a.verb == "delete_note") {
        auto parts = split_note_path(need_string(a, "path"));
        VaultFolder& f = dig_folder(s, parts, parts.size() - 1, false);
        if (f.notes.erase(parts.back()) == 0) {
            throw Error("DomainViolation", "no such note: " + parts.back());
        }
        return s;
    }
    throw Error("UnknownVerb", "vault has no action '" + a.verb + "'");
}

WorkbookState apply_workbook(WorkbookState s, const AppAction& a) {
    if (a.verb == "create_sheet") {
        std::string name = need_string(a, "name");
        if (s.find_sheet(name)) throw Error("DomainViolation", "sheet exists: " + name);
        s.sheets.push_back(Sheet{name, {}});
        return s;
    }
    if (a.verb == "set_cell") {
        std::string sheet_name = need_string(a, "sheet");
        std::string addr = need_string(a, "addr");
        if (!valid_address(addr)) throw Error("InvalidParams", "bad cell address: " + addr);
        Sheet* sheet = s.find_sheet(sheet_name);
        if (!sheet) throw Error("DomainViolation", "no such sheet: " + sheet_name);
        Cell& cell = sheet->cells[addr];
        if (a.params.count("formula")) {
            std::string f = need_string(a, "formula");
            std::string err;
            if (!formula_parses(f, &err)) throw Error("DomainViolation", "bad formula: " + err);
            if (would_create_cycle(s, sheet_name, addr, f)) {
                throw Error("DomainViolation", "formula cycle at " + addr);
            }
            cell.formula = f;
            cell.value.reset();
        } else if (a.params.count("value")) {
            cell.value = need_scalar(a, "value");
            cell.formula.reset();
        }
        if (a.params.count("bold")) {
            Scalar b = need_scalar(a, "bold");
            cell.bold = std::holds_alternative<bool>(b) ? std::get<bool>(b)
                                                        : scalar_to_string(b) == "true";
        }
        if (!a.params.count("formula") && !a.params.count("value") && !a.params.count("bold")) {
            throw Error("InvalidParams", "set_cell needs value, formula or bold");
        }
        return s;
    }
    if (a.verb == "delete_cell") {
        std::string sheet_name = need_string(a, "sheet");
        Sheet* sheet = s.find_sheet(sheet_name);
        if (!sheet) throw Error("DomainViolation", "no such sheet: " + sheet_name);
        sheet->cells.erase(need_string(a, "addr"));
        return s;
    }
    throw Error("UnknownVerb", "workbook has no action '" + a.verb + "'");
}

int64_t next_id(const std::vector<Json>& rows) {
    int64_t mx = 0;
    for (const auto& r : rows) mx = std::max(mx, r.value("id", int64_t(0)));
    return mx + 1;
}

MediaLibraryState apply_media(MediaLibraryState s, const AppAction& a) {
    if (a.verb == "import_image") {
        std::string filename = need_string(a, "filename");
        if (s.find_image(filename)) {
            throw Error("DomainViolation", "image already imported: " + filename);
        }
        auto& images = s.library_store.tables["images"];
        images.push_back(Json{{"id", next_id(images)}, {"filename", filename}, {"rating", 0}});
        return s;
    }
    if (a.verb == "create_tag") {
        std::string name = need_string(a, "name");
        if (s.find_tag(name)) throw Error("DomainViolation", "tag already exists: " + name);
        auto& tags = s.tags_table();
        tags.push_back(Json{{"id", next_id(tags)}, {"name", name}});
        return s;
    }
    if (a.verb == "attach_tag" || a.verb == "detach_tag") {
        const Json* img = s.find_image(need_string(a, "filename"));
        const Json* tag = s.find_tag(need_string(a, "tag"));
        if (!img) throw Error("DomainViolation", "no such image");
        if (!tag) throw Error("DomainViolation", "no such tag");
        int64_t imgid = (*img)["id"].get<int64_t>();
        int64_t tagid = (*tag)["id"].get<int64_t>();
        auto& ti = s.library_store.tables["tagged_images"];
        auto match = [&](const Json& row) {
            return row.value("imgid", int64_t(-1)) == imgid &&
                   row.value("tagid", int64_t(-1)) == tagid;
        };
        auto it = std::find_if(ti.begin(), ti.end(), match);
        if (a.verb == "attach_tag") {
            if (it == ti.end()) ti.push_back(Json{{"imgid", imgid}, {"tagid", tagid}});
        } else {
            if (it != ti.end()) ti.erase(it);
        }
        return s;
    }
    if (a.verb == "set_rating") {
        std::string filename = need_string(a, "filename");
        double rating = need_number(a, "rating");
        if (rating != std::floor(rating) || rating < 0 || rating > 5) {
            throw Error("DomainViolation", "rating must be an integer in 0..5");
        }
        auto& images = s.library_store.tables["images"];
        for (auto& row : images) {
            if (row.value("filename", "") == filename) {
                row["rating"] = static_cast<int64_t>(rating);
                return s;
            }
        }
        throw Error("DomainViolation", "no such image: " + filename);
    }
    throw Error("UnknownVerb", "media has no action '" + a.verb + "'");
}

}  // namespace

Json AppAction::to_json() const {
    Json p = Json::object();
    for (const auto& [k, v] : params) p[k] = scalar_to_json(v);
    return Json{{"app_id", app_id}, {"verb", verb}, {"params", p}};
}

AppAction AppAction::from_json(const Json& j) {
    AppAction a;
    a.app_id = j.at("app_id").get<std::string>();
    a.verb = j.at("verb").get<std::string>();
    if (j.contains("params")) {
        for (const auto& [k, v] : j["params"].items()) a.params[k] = scalar_from_json(v);
    }
    return a;
}

bool is_known_app(const std::string& app_id) {
    return std::find(kApps.begin(), kApps.end(), app_id) != kApps.end();
}

std::vector<std::string> known_apps() { return kApps; }

std::vector<std::string> action_vocabulary(const std::string& app_id) {
    if (app_id == "vault") {
        return {"create_folder", "create_note", "set_frontmatter", "append_body", "delete_note"};
    }
    if (app_id == "workbook") return {"create_sheet", "set_cell", "delete_cell"};
    if (app_id == "media") {
        return {"import_image", "create_tag", "attach_tag", "detach_tag", "set_rating"};
    }
    throw Error("UnknownApp", "no such app: " + app_id);
}

std::string app_id_of(const AppState& state) {
    if (std::holds_alternative<VaultState>(state)) return "vault";
    if (std::holds_alternative<WorkbookState>(state)) return "workbook";
    return "media";
}

AppState empty_state(const std::string& app_id) {
    if (app_id == "vault") return VaultState{};
    if (app_id == "workbook") return WorkbookState{};
    if (app_id == "media") return empty_media_state(2);
    throw Error("UnknownApp", "no such app: " + app_id);
}

AppState apply_action(const AppState& state, const AppAction& action) {
    std::string app = app_id_of(state);
    if (action.app_id != app) {
        throw Error("InvalidParams",
                    "action targets app '" + action.app_id + "' but state is '" + app + "'");
    }
    if (app == "vault") return apply_vault(std::get<VaultState>(state), action);
    if (app == "workbook") return apply_workbook(std::get<WorkbookState>(state), action);
    return apply_media(std::get<MediaLibraryState>(state), action);
}

std::vector<std::string> persist_app_state(const AppState& state, const std::string& sandbox_root) {
    std::vector<std::string> written;
    if (std::holds_alternative<VaultState>(state)) {
        persist_vault(std::get<VaultState>(state), sandbox_root, &written);
    } else if (std::holds_alternative<WorkbookState>(state)) {
        persist_workbook(std::get<WorkbookState>(state), sandbox_root, &written);
    } else {
        persist_media(std::get<MediaLibraryState>(state), sandbox_root, &written);
    }
    return written;
}

AppState load_app_state(const std::string& app_id, const std::string& sandbox_root) {
    if (app_id == "vault") return load_vault(sandbox_root);
    if (app_id == "workbook") return load_workbook(sandbox_root);
    if (app_id == "media") return load_media(sandbox_root);
    throw Error("UnknownApp", "no such app: " + app_id);
}

Json canonical_state_json(const AppState& state) {
    if (std::holds_alternative<VaultState>(state)) {
        return std::get<VaultState>(state).to_canonical_json();
    }
    if (std::holds_alternative<WorkbookState>(state)) {
        return std::get<WorkbookState>(state).to_canonical_json();
    }
    return std::get<MediaLibraryState>(state).to_canonical_json();
}

std::string digest_state(const AppState& state) {
    return sha256_hex(canonical_state_json(state).dump());
}

std::string summarize_state(const AppState& state) {
    std::ostringstream out;
    if (std::holds_alternative<VaultState>(state)) {
        const auto& v = std::get<VaultState>(state);
        out << "vault: " << v.note_count() << " notes, " << v.folder_count() << " folders";
    } else if (std::holds_alternative<WorkbookState>(state)) {
        const auto& w = std::get<WorkbookState>(state);
        size_t cells = 0;
        for (const auto& s : w.sheets) cells += s.cells.size();
        out << "workbook: " << w.sheets.size() << " sheets, " << cells << " cells";
    } else {
        const auto& m = std::get<MediaLibraryState>(state);
        out << "media library (schema v" << m.schema_version
            << "): " << m.library_store.table("images").size() << " images, "
            << m.tags_table().size() << " tags";
    }
    return out.str();
}

}  // namespace wb::apps
