#include "qos/variants.hpp"

#include "qos/error.hpp"

namespace qos {

std::string_view to_string(FilteringTag t) {
  switch (t) {
    case FilteringTag::user_intensive: return "user-intensive";
    case FilteringTag::service_intensive: return "service-intensive";
    case FilteringTag::hybrid: return "hybrid";
  }
  return "?";
}

std::string_view to_string(FillTag t) {
  switch (t) {
    case FillTag::none: return "none";
    case FillTag::cf: return "cf";
    case FillTag::mf: return "mf";
    case FillTag::both: return "both";
  }
  return "?";
}

std::string_view to_string(PredictorTag t) {
  switch (t) {
    case PredictorTag::cf_value: return "cf-value";
    case PredictorTag::mf_value: return "mf-value";
    case PredictorTag::nr: return "nr";
    case PredictorTag::hierarchical: return "hierarchical";
  }
  return "?";
}

std::string_view to_string(AggregatorTag t) {
  switch (t) {
    case AggregatorTag::controller: return "controller";
    case AggregatorTag::nrl2_only: return "nrl2-only";
    case AggregatorTag::mae_ag_only: return "mae-ag-only";
    case AggregatorTag::none: return "n/a";
  }
  return "?";
}

void VariantSpec::validate() const {
  auto fail = [&](const std::string& why) {
    throw InputError("variant '" + name + "': " + why);
  };
  const bool hierarchical = predictor == PredictorTag::hierarchical;
  if (hierarchical) {
    if (fill != FillTag::both) fail("hierarchical prediction needs fill = both");
    if (filtering != FilteringTag::hybrid) fail("hierarchical prediction needs hybrid filtering");
    if (aggregator == AggregatorTag::none) fail("hierarchical prediction needs an aggregator");
  } else {
    if (filtering == FilteringTag::hybrid) fail("single-level predictors need one filter side");
    if (aggregator != AggregatorTag::none) fail("only hierarchical prediction aggregates");
    if (fill == FillTag::both) fail("single-level predictors use at most one fill");
    if (fill_values_as_level1) fail("fill-value first level applies to hierarchical only");
  }
  if (predictor == PredictorTag::cf_value && fill != FillTag::cf) fail("cf-value needs fill = cf");
  if (predictor == PredictorTag::mf_value && fill != FillTag::mf) fail("mf-value needs fill = mf");
}

namespace {

VariantSpec single(std::string name, FilteringTag side, FillTag fill, PredictorTag predictor,
                   bool context = true) {
  VariantSpec v;
  v.name = std::move(name);
  v.filtering = side;
  v.context_filter = context;
  v.fill = fill;
  v.predictor = predictor;
  v.aggregator = AggregatorTag::none;
  return v;
}

VariantSpec hierarchical(std::string name, AggregatorTag agg, bool context, bool fill_level1) {
  VariantSpec v;
  v.name = std::move(name);
  v.context_filter = context;
  v.aggregator = agg;
  v.fill_values_as_level1 = fill_level1;
  return v;
}

std::vector<VariantSpec> build() {
  using F = FilteringTag;
  using P = PredictorTag;
  const auto U = F::user_intensive;
  const auto S = F::service_intensive;
  std::vector<VariantSpec> v{
      single("UMF", U, FillTag::mf, P::mf_value),
      single("SMF", S, FillTag::mf, P::mf_value),
      single("UCF", U, FillTag::cf, P::cf_value),
      single("SCF", S, FillTag::cf, P::cf_value),
      single("UNR", U, FillTag::none, P::nr),
      single("SNR", S, FillTag::none, P::nr),
      single("UMNR", U, FillTag::mf, P::nr),
      single("SMNR", S, FillTag::mf, P::nr),
      single("UCNR", U, FillTag::cf, P::nr),
      single("SCNR", S, FillTag::cf, P::nr),
      hierarchical("CAHPHFWoNN", AggregatorTag::controller, true, true),
      hierarchical("CAHPHF-MAE", AggregatorTag::mae_ag_only, true, false),
      single("UCNRWoCF", U, FillTag::cf, P::nr, false),
      single("SCNRWoCF", S, FillTag::cf, P::nr, false),
      single("UMNRWoCF", U, FillTag::mf, P::nr, false),
      single("SMNRWoCF", S, FillTag::mf, P::nr, false),
      hierarchical("CAHPHFWoCF", AggregatorTag::controller, false, false),
      hierarchical("CAHPHF", AggregatorTag::controller, true, false),
  };
  for (const auto& s : v) s.validate();
  return v;
}

}  // namespace

const std::vector<VariantSpec>& named_variants() {
  static const std::vector<VariantSpec> variants = build();
  return variants;
}

const VariantSpec& find_variant(std::string_view name) {
  for (const auto& v : named_variants())
    if (v.name == name) return v;
  std::string names;
  for (const auto& v : named_variants()) names += (names.empty() ? "" : ", ") + v.name;
  throw InputError("unknown variant '" + std::string(name) + "' (known: " + names + ")");
}

}  // namespace qos
