#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hipcap/hierarchy/box.hpp"
#include "hipcap/relation/gcn.hpp"

namespace hipcap {

inline constexpr std::size_t kDefaultMaxRegions = 36;
inline constexpr int kDatasetVersion = 1;

/// One image's ingested detector output and annotations.
struct SceneRecord {
    std::string image_id;
    std::string split = "train";
    std::vector<Region> regions;               // region.index == position
    std::optional<std::vector<RelationEdge>> edges;
    std::vector<std::string> captions;
    std::optional<std::vector<std::size_t>> labels;

    std::size_t feature_dim() const { return regions.empty() ? 0 : regions.front().region_feature.size(); }
};

struct DatasetLimits {
    std::size_t max_regions = kDefaultMaxRegions;
    bool require_captions = false;
};

/// Throws InputError naming the record and field path of the first violation.
void validate_record(const SceneRecord& record, std::size_t record_index, const DatasetLimits& limits = {});

/// JSON Lines: an optional header line {"format":"hipcap-scenes","version":1}
/// followed by one record per line. Blank lines are skipped.
std::vector<SceneRecord> read_dataset(std::istream& in, const DatasetLimits& limits = {});
void write_dataset(std::ostream& out, const std::vector<SceneRecord>& records);

std::vector<SceneRecord> load_dataset(const std::string& path, const DatasetLimits& limits = {});
void save_dataset(const std::string& path, const std::vector<SceneRecord>& records);

/// Records whose split equals `split`, in file order.
std::vector<const SceneRecord*> select_split(const std::vector<SceneRecord>& records, const std::string& split);

const SceneRecord* find_record(const std::vector<SceneRecord>& records, const std::string& image_id);

}  // namespace hipcap
