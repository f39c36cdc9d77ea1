#pragma once

#include <map>
#include <string>
#include <vector>

#include "worldbench/common.hpp"

namespace wb::apps {

// Flat named tables of scalar rows. Querying an absent table is a
// MissingTable condition, never silent emptiness.
struct TableStore {
    std::string name;
    int schema_version = 2;
    std::map<std::string, std::vector<Json>> tables;

    const std::vector<Json>& table(const std::string& table_name) const;
    bool has_table(const std::string& table_name) const { return tables.count(table_name) > 0; }
};

// Two stores, schema-versioned table placement:
//   v1: images, tags, tagged_images all live in the library store.
//   v2: tags moves to the data store; tagged_images stays in library.
struct MediaLibraryState {
    TableStore library_store;
    TableStore data_store;
    int schema_version = 2;

    Json to_canonical_json() const;

    const Json* find_image(const std::string& filename) const;
    const Json* find_tag(const std::string& name) const;
    std::vector<std::string> image_tags(const std::string& filename) const;

    const std::vector<Json>& tags_table() const;
    std::vector<Json>& tags_table();
};

MediaLibraryState empty_media_state(int schema_version);

inline constexpr const char* kLibraryStoreFile = "library.store";
inline constexpr const char* kDataStoreFile = "data.store";

void persist_media(const MediaLibraryState& s, const std::string& sandbox_root,
                   std::vector<std::string>* written);
MediaLibraryState load_media(const std::string& sandbox_root);

Json table_store_to_json(const TableStore& s);
TableStore table_store_from_json(const Json& j, const std::string& source);

}  // namespace wb::apps
