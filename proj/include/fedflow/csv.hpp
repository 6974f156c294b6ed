#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedflow/dataset.hpp"

namespace fedflow {

// Column mapping for a flow-feature CSV export. Defaults follow the
// DoHLyzer layout; renamed exports supply their own names.
struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string label_column = "Label";
  std::string source_ip_column = "SourceIP";
  std::string dest_ip_column = "DestinationIP";
  std::string benign_value = "Benign";
  std::string malicious_value = "Malicious";
};

// The 28 DoHLyzer statistical feature columns.
CsvSchema dohlyzer_schema();

struct LoadedCsv {
  std::vector<FlowRecord> records;
  // parallel to records, kept out of the feature vectors
  std::vector<std::string> source_ip;
  std::vector<std::string> dest_ip;
};

LoadedCsv load_flow_csv(const std::filesystem::path& path, const CsvSchema& schema);

struct PartitionRule {
  int entity_id = -1;
  std::string name;
  std::vector<std::string> dest_ips;
};

struct PartitionSpec {
  std::vector<PartitionRule> rules;
};

struct PartitionCounts {
  std::string name;
  int64_t total = 0;
  int64_t malicious = 0;
  int64_t benign = 0;
};

struct PartitionResult {
  std::vector<std::vector<FlowRecord>> per_entity;
  std::vector<std::string> entity_names;
  std::vector<PartitionCounts> counts;
  int64_t discarded = 0;  // records matching no rule
};

// Assigns each record to the entity whose rule lists its destination IP.
// Unmatched records land in the discard bucket and are counted.
PartitionResult partition_by_entity(const LoadedCsv& data, const PartitionSpec& spec);

}  // namespace fedflow
