#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qos {

enum class FilteringTag { user_intensive, service_intensive, hybrid };
enum class FillTag { none, cf, mf, both };
enum class PredictorTag { cf_value, mf_value, nr, hierarchical };
enum class AggregatorTag { controller, nrl2_only, mae_ag_only, none };

std::string_view to_string(FilteringTag t);
std::string_view to_string(FillTag t);
std::string_view to_string(PredictorTag t);
std::string_view to_string(AggregatorTag t);

// One pipeline configuration: which filter runs, whether context takes part,
// how the submatrices are densified, what produces the value and how
// hierarchical outputs are fused.
struct VariantSpec {
  std::string name;
  FilteringTag filtering = FilteringTag::hybrid;
  bool context_filter = true;
  FillTag fill = FillTag::both;
  PredictorTag predictor = PredictorTag::hierarchical;
  AggregatorTag aggregator = AggregatorTag::controller;
  // Hierarchical variant whose first level is replaced by the raw fill
  // values at each cell.
  bool fill_values_as_level1 = false;

  // Throws InputError describing the first violated constraint.
  void validate() const;
};

// The 17 intermediate variants followed by CAHPHF, in reporting order.
const std::vector<VariantSpec>& named_variants();

// Case-sensitive lookup; throws InputError listing the valid names.
const VariantSpec& find_variant(std::string_view name);

}  // namespace qos
