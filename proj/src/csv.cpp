#include "fedflow/csv.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "fedflow/errors.hpp"
#include "fedflow/io.hpp"

namespace fedflow {

CsvSchema dohlyzer_schema() {
  CsvSchema s;
  s.feature_columns = {
      "FlowBytesSent",
      "FlowSentRate",
      "FlowBytesReceived",
      "FlowReceivedRate",
      "PacketLengthVariance",
      "PacketLengthStandardDeviation",
      "PacketLengthMean",
      "PacketLengthMedian",
      "PacketLengthMode",
      "PacketLengthSkewFromMedian",
      "PacketLengthSkewFromMode",
      "PacketLengthCoefficientofVariation",
      "PacketTimeVariance",
      "PacketTimeStandardDeviation",
      "PacketTimeMean",
      "PacketTimeMedian",
      "PacketTimeMode",
      "PacketTimeSkewFromMedian",
      "PacketTimeSkewFromMode",
      "PacketTimeCoefficientofVariation",
      "ResponseTimeTimeVariance",
      "ResponseTimeTimeStandardDeviation",
      "ResponseTimeTimeMean",
      "ResponseTimeTimeMedian",
      "ResponseTimeTimeMode",
      "ResponseTimeTimeSkewFromMedian",
      "ResponseTimeTimeSkewFromMode",
      "ResponseTimeTimeCoefficientofVariation",
  };
  return s;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

LoadedCsv load_flow_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  if (schema.feature_columns.empty()) throw ConfigError("csv schema lists no feature columns");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open csv: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty csv (no header): " + path.string());
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);

  std::unordered_map<std::string, size_t> col_index;
  for (size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;

  auto require = [&](const std::string& name) -> size_t {
    auto it = col_index.find(name);
    if (it == col_index.end())
      throw DataError("csv schema error: missing column '" + name + "' in " + path.string());
    return it->second;
  };

  std::vector<size_t> feature_idx;
  feature_idx.reserve(schema.feature_columns.size());
  for (const auto& name : schema.feature_columns) feature_idx.push_back(require(name));
  const size_t label_idx = require(schema.label_column);
  const size_t src_idx = require(schema.source_ip_column);
  const size_t dst_idx = require(schema.dest_ip_column);

  const std::string benign_lc = lower(schema.benign_value);
  const std::string malicious_lc = lower(schema.malicious_value);

  LoadedCsv out;
  int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw DataError("csv row error at data row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));

    FlowRecord rec;
    rec.source_row = row;
    rec.features.reserve(feature_idx.size());
    for (size_t k = 0; k < feature_idx.size(); ++k) {
      const std::string& cell = fields[feature_idx[k]];
      if (cell.empty()) {
        // pandas-style exports leave undefined statistics blank
        rec.features.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      bool ok = false;
      double v = parse_double(cell, ok);
      if (!ok)
        throw DataError("csv row error at data row " + std::to_string(row) +
                        ": non-numeric value '" + cell + "' in column '" +
                        schema.feature_columns[k] + "'");
      rec.features.push_back(v);
    }

    const std::string label_lc = lower(fields[label_idx]);
    if (label_lc == malicious_lc || label_lc == "1")
      rec.label = 1;
    else if (label_lc == benign_lc || label_lc == "0")
      rec.label = 0;
    else
      throw DataError("csv row error at data row " + std::to_string(row) +
                      ": unrecognized label '" + fields[label_idx] + "'");

    out.source_ip.push_back(fields[src_idx]);
    out.dest_ip.push_back(fields[dst_idx]);
    out.records.push_back(std::move(rec));
    ++row;
  }
  if (out.records.empty()) throw DataError("csv has a header but no data rows: " + path.string());
  return out;
}

PartitionResult partition_by_entity(const LoadedCsv& data, const PartitionSpec& spec) {
  if (spec.rules.empty()) throw ConfigError("partition spec has no rules");

  std::unordered_set<int> seen_ids;
  std::unordered_map<std::string, int> ip_to_entity;
  int max_id = -1;
  for (const auto& rule : spec.rules) {
    if (rule.entity_id < 0) throw ConfigError("partition rule for '" + rule.name + "' lacks an entity id");
    if (!seen_ids.insert(rule.entity_id).second)
      throw ConfigError("partition rules reuse entity id " + std::to_string(rule.entity_id));
    max_id = std::max(max_id, rule.entity_id);
    for (const auto& ip : rule.dest_ips) {
      auto [it, inserted] = ip_to_entity.emplace(ip, rule.entity_id);
      if (!inserted)
        throw ConfigError("overlapping partition rules: ip " + ip + " appears in two rules");
    }
  }

  PartitionResult res;
  res.per_entity.resize(static_cast<size_t>(max_id) + 1);
  res.entity_names.resize(static_cast<size_t>(max_id) + 1);
  res.counts.resize(static_cast<size_t>(max_id) + 1);
  for (const auto& rule : spec.rules) {
    res.entity_names[static_cast<size_t>(rule.entity_id)] = rule.name;
    res.counts[static_cast<size_t>(rule.entity_id)].name = rule.name;
  }

  for (size_t i = 0; i < data.records.size(); ++i) {
    auto it = ip_to_entity.find(data.dest_ip[i]);
    if (it == ip_to_entity.end()) {
      ++res.discarded;
      continue;
    }
    FlowRecord rec = data.records[i];
    rec.entity_id = it->second;
    auto& counts = res.counts[static_cast<size_t>(it->second)];
    ++counts.total;
    if (rec.label == 1)
      ++counts.malicious;
    else
      ++counts.benign;
    res.per_entity[static_cast<size_t>(it->second)].push_back(std::move(rec));
  }
  return res;
}

}  // namespace fedflow
