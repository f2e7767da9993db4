#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpsketch/data_vector.hpp"
#include "lpsketch/estimators.hpp"
#include "lpsketch/knn.hpp"
#include "lpsketch/moments.hpp"
#include "lpsketch/projection.hpp"
#include "lpsketch/simlab.hpp"

namespace lpsketch {

// Data-level failure (missing/malformed files, bad records). The CLI maps
// this to its data-error exit code.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetFile {
  std::string path;
  std::string format = "dense-csv";  // dense-csv | svmlight
  std::size_t dim = 0;               // required for svmlight, inferred for dense-csv
  bool labeled = false;              // dense-csv: first column is the label
};

// Labels required (svmlight always has them; dense-csv needs labeled=true).
// The returned split is empty; callers assign train/test indices.
LabeledDataset load_labeled(const DatasetFile& f);
std::vector<DataVector> load_vectors(const DatasetFile& f);

void save_sketches(std::ostream& os, const std::vector<Sketch>& sketches);
void save_sketches(const std::string& path, const std::vector<Sketch>& sketches);
std::vector<Sketch> load_sketches(std::istream& is, Role role = Role::left);
std::vector<Sketch> load_sketches(const std::string& path, Role role = Role::left);

// Shortest representation that round-trips a double (17 significant digits).
std::string format_real(double v);

void write_mse_csv(std::ostream& os, const std::vector<MseRow>& rows);
void write_knn_csv(std::ostream& os, const std::vector<KnnResult>& rows);
void write_estimate_csv(std::ostream& os, const Estimate& e);
void write_moments_csv(std::ostream& os, const MomentTable& m);

}  // namespace lpsketch
