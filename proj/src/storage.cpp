#include "fedflow/storage.hpp"

#include <charconv>
#include <map>

#include <json.hpp>

#include "fedflow/errors.hpp"
#include "fedflow/io.hpp"

namespace fedflow {

using nlohmann::json;

PreparedDataset prepare_pipeline(const std::vector<std::vector<FlowRecord>>& per_entity,
                                 const std::vector<std::string>& entity_names,
                                 double global_fraction, double local_fraction, uint64_t seed) {
  PreparedDataset out;
  out.split = split_validation(per_entity, entity_names, global_fraction, local_fraction, seed);

  std::vector<std::vector<double>> train_union;
  for (const auto& shard : out.split.shards)
    for (const auto& rec : shard.train) train_union.push_back(rec.features);
  out.standardizer = fit_standardizer_rows(train_union);

  std::vector<std::vector<double>> standardized;
  standardized.reserve(train_union.size());
  for (const auto& row : train_union) standardized.push_back(out.standardizer.apply(row));
  out.pca = fit_pca(standardized, static_cast<int>(train_union[0].size()));
  return out;
}

namespace {

std::string records_to_csv(const std::vector<FlowRecord>& records, size_t dim) {
  std::string out = "source_row,label";
  for (size_t j = 0; j < dim; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& rec : records) {
    out += std::to_string(rec.source_row);
    out += ',';
    out += std::to_string(rec.label);
    for (double v : rec.features) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<FlowRecord> records_from_csv(const std::filesystem::path& path, int entity_id) {
  const std::string text = read_file(path);
  std::vector<FlowRecord> records;
  size_t pos = text.find('\n');  // skip header
  if (pos == std::string::npos) throw DataError("shard file has no header: " + path.string());
  ++pos;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;

    FlowRecord rec;
    rec.entity_id = entity_id;
    size_t field = 0;
    size_t start = 0;
    while (start <= line.size()) {
      size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      std::string_view cell = line.substr(start, comma - start);
      if (field == 0) {
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), rec.source_row);
        if (ec != std::errc()) throw DataError("bad source_row in " + path.string());
      } else if (field == 1) {
        rec.label = cell == "1" ? 1 : 0;
      } else {
        bool ok = false;
        rec.features.push_back(parse_double(cell, ok));
        if (!ok) throw DataError("bad feature value in " + path.string());
      }
      ++field;
      start = comma + 1;
      if (comma == line.size()) break;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

void save_prepared(const std::filesystem::path& dir, const PreparedDataset& data,
                   const std::vector<PartitionCounts>& source_counts, int64_t discarded) {
  std::filesystem::create_directories(dir / "shards");
  const size_t dim = data.standardizer.means.size();

  json meta;
  meta["version"] = 1;
  meta["dim"] = dim;
  meta["seed"] = data.split.seed;
  meta["discarded"] = discarded;
  meta["global_validation"] = data.split.global_validation.size();
  {
    // coverage of the uniform global draw, per entity
    std::map<int, int64_t> coverage;
    for (const auto& rec : data.split.global_validation) ++coverage[rec.entity_id];
    json by_entity = json::object();
    for (const auto& [entity, count] : coverage) by_entity[std::to_string(entity)] = count;
    meta["global_validation_by_entity"] = std::move(by_entity);
  }
  json entities = json::array();
  for (const auto& shard : data.split.shards) {
    int64_t mal = 0;
    for (const auto& r : shard.train) mal += r.label;
    for (const auto& r : shard.local_validation) mal += r.label;
    json e;
    e["id"] = shard.entity_id;
    e["name"] = shard.provider_name;
    e["train"] = shard.train.size();
    e["local_validation"] = shard.local_validation.size();
    e["malicious_after_global_split"] = mal;
    entities.push_back(std::move(e));
  }
  meta["entities"] = std::move(entities);
  if (!source_counts.empty()) {
    json counts = json::array();
    for (const auto& c : source_counts)
      counts.push_back({{"name", c.name}, {"total", c.total}, {"malicious", c.malicious}, {"benign", c.benign}});
    meta["source_counts"] = std::move(counts);
  }

  write_file_atomic(dir / "dataset.json", meta.dump(2) + "\n");
  write_file_atomic(dir / "preprocess.json", preprocess_to_json(data.standardizer, data.pca));
  for (const auto& shard : data.split.shards) {
    const std::string base = "entity_" + std::to_string(shard.entity_id);
    write_file_atomic(dir / "shards" / (base + "_train.csv"), records_to_csv(shard.train, dim));
    write_file_atomic(dir / "shards" / (base + "_val.csv"),
                      records_to_csv(shard.local_validation, dim));
  }
  write_file_atomic(dir / "global_val.csv", records_to_csv(data.split.global_validation, dim));
}

PreparedDataset load_prepared(const std::filesystem::path& dir) {
  json meta = json::parse(read_file(dir / "dataset.json"), nullptr, false);
  if (meta.is_discarded()) throw DataError("dataset.json is not valid json in " + dir.string());

  PreparedDataset data;
  try {
    if (meta.at("version").get<int>() != 1) throw DataError("unsupported dataset version");
    data.split.seed = meta.at("seed").get<uint64_t>();
    const auto dim = meta.at("dim").get<size_t>();

    for (const auto& e : meta.at("entities")) {
      EntityShard shard;
      shard.entity_id = e.at("id").get<int>();
      shard.provider_name = e.at("name").get<std::string>();
      const std::string base = "entity_" + std::to_string(shard.entity_id);
      shard.train = records_from_csv(dir / "shards" / (base + "_train.csv"), shard.entity_id);
      shard.local_validation =
          records_from_csv(dir / "shards" / (base + "_val.csv"), shard.entity_id);
      for (const auto& rec : shard.train)
        if (rec.features.size() != dim) throw DataError("shard dimension mismatch in " + base);
      data.split.shards.push_back(std::move(shard));
    }
    data.split.global_validation = records_from_csv(dir / "global_val.csv", -1);
  } catch (const json::exception& ex) {
    throw DataError(std::string("malformed dataset.json: ") + ex.what());
  }

  preprocess_from_json(read_file(dir / "preprocess.json"), data.standardizer, data.pca);
  return data;
}

}  // namespace fedflow
