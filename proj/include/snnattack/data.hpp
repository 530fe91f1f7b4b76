#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnattack/network.hpp"
#include "snnattack/rng.hpp"
#include "snnattack/tensor.hpp"

namespace snnattack {

// One image input: (C,H,W) pixels normalized into [0,1].
struct ImageSample {
    Tensor pixels;
    int label = -1;
};

// One address-event record from a dynamic vision sensor.
struct Event {
    int x = 0;
    int y = 0;
    int polarity = 0;
    std::int64_t t_us = 0;
};

struct EventStream {
    std::vector<Event> events; // sorted by timestamp at load time
    int label = -1;
};

// MNIST IDX pair (magic 2051 images / 2049 labels, big-endian dims); pixel
// bytes are scaled by 1/255.
std::vector<ImageSample> load_mnist_idx(const std::string& images_path,
                                        const std::string& labels_path);

// Rate coding: element (t,c,h,w) spikes with probability pixel(c,h,w),
// independently per timestep. Draws run in row-major (T,C,H,W) order.
SpikeTensor bernoulli_encode(const Tensor& pixels, int time_steps, Rng& rng);
SpikeTensor bernoulli_encode(const ImageSample& img, int time_steps, Rng& rng);

// N-MNIST AER file: consecutive 5-byte records, byte0 x, byte1 y, byte2
// bit7 polarity + bits6..0 timestamp bits 22..16, bytes3..4 timestamp bits
// 15..0 (microseconds).
EventStream load_aer_events(const std::string& path, int label);

// Directory layout <dir>/<digit>/<recording>.bin.
std::vector<EventStream> load_nmnist(const std::string& dir);

struct BinnedEvents {
    SpikeTensor spikes;
    std::size_t skipped = 0; // out-of-bounds events, counted not fatal
};

// Frame index floor(t_us / (bin_ms * 1000)); events past the window are
// dropped, multiple events in one cell OR into a single spike.
BinnedEvents bin_events(const EventStream& stream, double bin_ms, int time_steps, int height,
                        int width);

struct SpikeDataset {
    std::vector<SpikeTensor> samples; // grouped by class
    std::vector<int> labels;
    int time_window = 0;
    Shape3 frame;
    int num_classes = 0;
    std::uint64_t seed = 0;
};

// Class-conditional Bernoulli rate patterns: each class owns a band of the
// flattened frame with a high firing rate against a sparse background.
// Deterministic per (seed, class, sample index).
SpikeDataset synth_spikes(int num_classes, int samples_per_class, int time_steps, Shape3 frame,
                          std::uint64_t seed);

// Raw little-endian u8 spike blocks at <path>.bin plus a JSON sidecar at
// <path>.json carrying shape, labels and seed.
void save_spike_dataset(const SpikeDataset& ds, const std::string& path_prefix);
SpikeDataset load_spike_dataset(const std::string& path_prefix);

struct ImageDataset {
    std::vector<ImageSample> samples; // grouped by class
    Shape3 frame;
    int num_classes = 0;
    std::uint64_t seed = 0;
};

// Synthetic image classes built from a few soft blobs per class, with
// per-sample translation jitter and pixel noise. Stands in for an image
// benchmark when no real dataset is on disk.
ImageDataset synth_images(int num_classes, int samples_per_class, Shape3 frame,
                          std::uint64_t seed);

} // namespace snnattack
