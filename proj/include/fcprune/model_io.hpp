#pragma once

#include <string>

#include "fcprune/net.hpp"

namespace fcprune {

/// Writes the net as a JSON manifest plus one FTA1 file per tensor, all in
/// `dir`. The manifest lists layers in order with activation kind and tensor
/// file names; field order and layout are canonical so
/// save -> load -> save is byte-identical. Returns the manifest path.
std::string save_model(const DenseNet& net, const std::string& dir,
                       const std::string& name = "model");

DenseNet load_model(const std::string& manifest_path);

/// Dataset packaging: features as one FTA1 tensor (d x m, samples are
/// columns) and labels as a 1 x m FTA1 tensor whose values are cast to the
/// nearest integer on load.
void save_dataset(const LabeledSet& set, const std::string& x_path, const std::string& y_path);
LabeledSet load_dataset(const std::string& x_path, const std::string& y_path);

/// Ingests a desk-scale CSV of rows `label,feature,feature,...` (an optional
/// header line is skipped) into a LabeledSet; sample per row, transposed to
/// columns.
LabeledSet load_csv_dataset(const std::string& csv_path);

} // namespace fcprune
