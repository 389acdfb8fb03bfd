#ifndef JACSHIELD_DATA_IO_HPP
#define JACSHIELD_DATA_IO_HPP

#include <string>

#include "jacshield/tensor.hpp"

namespace jacshield {

// Inputs are scaled to [0,1] by every loader/generator, matching the
// attack clip boxes.
struct Dataset {
    std::vector<Tensor> inputs;
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;
    std::string name;
    std::string split;

    std::size_t size() const { return inputs.size(); }
    void validate(double lo = 0.0, double hi = 1.0) const;
};

// Big-endian IDX pair (magic 2051 images / 2049 labels); pixels scaled
// by 1/255, images flattened to {rows*cols}.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batch: 10000 records of 1 label byte + 3072
// channel-planar pixel bytes; converted to {32,32,3} HWC in [0,1].
Dataset load_cifar10(const std::string& batch_path);

// Class c is an isotropic Gaussian blob around a seeded random point of
// norm 2; values pass through the fixed affine map (v+3)/6 and are
// clipped into [0,1]. Deterministic per seed.
Dataset synth_gaussians(std::size_t classes, std::size_t dims, std::size_t n_per_class,
                        double spread, std::uint64_t seed);

// Seeded class-stratified subset: per-class proportions preserved within
// one sample.
Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Reinterprets every input with a new shape of the same element count
// (flat MNIST rows -> {28,28,1} for conv nets).
Dataset reshape_inputs(Dataset ds, const Shape& shape);

}  // namespace jacshield

#endif
