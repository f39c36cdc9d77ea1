#include "worldbench/apps/media.hpp"

#include <filesystem>
#include <set>

namespace fs = std::filesystem;

namespace wb::apps {

const std::vector<Json>& TableStore::table(const std::string& table_name) const {
    auto it = tables.find(table_name);
    if (it == tables.end()) {
        throw Error("MissingTable", "missing table: " + table_name + " in store " + name);
    }
    return it->second;
}

MediaLibraryState empty_media_state(int schema_version) {
    if (schema_version != 1 && schema_version != 2) {
        throw Error("DomainViolation", "schema_version must be 1 or 2");
    }
    MediaLibraryState s;
    s.schema_version = schema_version;
    s.library_store.name = "library";
    s.library_store.schema_version = schema_version;
    s.data_store.name = "data";
    s.data_store.schema_version = schema_version;
    s.library_store.tables["images"] = {};
    s.library_store.tables["tagged_images"] = {};
    if (schema_version == 1) {
        s.library_store.tables["tags"] = {};
    } else {
        s.data_store.tables["tags"] = {};
    }
    return s;
}

const std::vector<Json>& MediaLibraryState::tags_table() const {
    return schema_version == 1 ? library_store.table("tags") : data_store.table("tags");
}

std::vector<Json>& MediaLibraryState::tags_table() {
    TableStore& store = schema_version == 1 ? library_store : data_store;
    auto it = store.tables.find("tags");
    if (it == store.tables.end()) {
        throw Error("MissingTable", "missing table: tags in store " + store.name);
    }
    return it->second;
}

const Json* MediaLibraryState::find_image(const std::string& filename) const {
    for (const auto& row : library_store.table("images")) {
        if (row.value("filename", "") == filename) return &row;
    }
    return nullptr;
}

const Json* MediaLibraryState::find_tag(const std::string& name) const {
    for (const auto& row : tags_table()) {
        if (row.value("name", "") == name) return &row;
    }
    return nullptr;
}

std::vector<std::string> MediaLibraryState::image_tags(const std::string& filename) const {
    const Json* img = find_image(filename);
    std::vector<std::string> out;
    if (!img) return out;
    int64_t imgid = (*img)["id"].get<int64_t>();
    for (const auto& ti : library_store.table("tagged_images")) {
        if (ti.value("imgid", int64_t(-1)) != imgid) continue;
        int64_t tagid = ti.value("tagid", int64_t(-1));
        for (const auto& tag : tags_table()) {
            if (tag.value("id", int64_t(-2)) == tagid) out.push_back(tag.value("name", ""));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Json table_store_to_json(const TableStore& s) {
    Json tables = Json::object();
    for (const auto& [name, rows] : s.tables) tables[name] = rows;
    return Json{{"store", s.name}, {"schema_version", s.schema_version}, {"tables", tables}};
}

TableStore table_store_from_json(const Json& j, const std::string& source) {
    if (!j.is_object() || !j.contains("store") || !j.contains("schema_version") ||
        !j.contains("tables")) {
        throw Error("MalformedState", source + ": store document missing required keys");
    }
    TableStore s;
    s.name = j["store"].get<std::string>();
    s.schema_version = j["schema_version"].get<int>();
    for (const auto& [name, rows] : j["tables"].items()) {
        if (!rows.is_array()) throw Error("MalformedState", source + ": table " + name);
        std::set<std::string> key_set;
        std::vector<Json> out;
        for (const auto& row : rows) {
            if (!row.is_object()) throw Error("MalformedState", source + ": row in " + name);
            std::set<std::string> keys;
            for (const auto& [k, v] : row.items()) {
                (void)v;
                keys.insert(k);
            }
            if (out.empty()) {
                key_set = keys;
            } else if (keys != key_set) {
                throw Error("MalformedState",
                            source + ": rows of table " + name + " disagree on key set");
            }
            out.push_back(row);
        }
        s.tables[name] = std::move(out);
    }
    return s;
}

Json MediaLibraryState::to_canonical_json() const {
    return Json{{"app", "media"},
                {"schema_version", schema_version},
                {"library", table_store_to_json(library_store)},
                {"data", table_store_to_json(data_store)}};
}

void persist_media(const MediaLibraryState& s, const std::string& sandbox_root,
                   std::vector<std::string>* written) {
    write_file((fs::path(sandbox_root) / kLibraryStoreFile).string(),
               table_store_to_json(s.library_store).dump(2) + "\n");
    write_file((fs::path(sandbox_root) / kDataStoreFile).string(),
               table_store_to_json(s.data_store).dump(2) + "\n");
    if (written) {
        written->push_back(kLibraryStoreFile);
        written->push_back(kDataStoreFile);
    }
}

MediaLibraryState load_media(const std::string& sandbox_root) {
    fs::path lib = fs::path(sandbox_root) / kLibraryStoreFile;
    fs::path data = fs::path(sandbox_root) / kDataStoreFile;
    if (!fs::exists(lib)) throw Error("MissingState", "missing " + lib.string());
    if (!fs::exists(data)) throw Error("MissingState", "missing " + data.string());
    auto parse = [](const fs::path& p) {
        try {
            return Json::parse(read_file(p.string()));
        } catch (const Json::parse_error& e) {
            throw Error("MalformedState",
                        p.string() + ": byte offset " + std::to_string(e.byte) + ": " + e.what());
        }
    };
    MediaLibraryState s;
    s.library_store = table_store_from_json(parse(lib), lib.string());
    s.data_store = table_store_from_json(parse(data), data.string());
    if (s.library_store.schema_version != s.data_store.schema_version) {
        throw Error("MalformedState", "stores disagree on schema_version");
    }
    s.schema_version = s.library_store.schema_version;
    // schema placement invariant: exactly one store holds tags
    bool lib_tags = s.library_store.has_table("tags");
    bool data_tags = s.data_store.has_table("tags");
    if (lib_tags == data_tags) {
        throw Error("MalformedState", "exactly one store must contain the tags table");
    }
    if ((s.schema_version == 1) != lib_tags) {
        throw Error("MalformedState", "tags table placement contradicts schema_version");
    }
    // referential integrity of tagged_images
    std::set<int64_t> img_ids, tag_ids;
    for (const auto& row : s.library_store.table("images")) {
        img_ids.insert(row.value("id", int64_t(-1)));
    }
    for (const auto& row : s.tags_table()) tag_ids.insert(row.value("id", int64_t(-1)));
    for (const auto& row : s.library_store.table("tagged_images")) {
        if (!img_ids.count(row.value("imgid", int64_t(-1))) ||
            !tag_ids.count(row.value("tagid", int64_t(-1)))) {
            throw Error("MalformedState", "tagged_images row references unknown id");
        }
    }
    return s;
}

}  // namespace wb::apps
