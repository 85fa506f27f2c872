#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "fbnll/dataset.hpp"
#include "fbnll/errors.hpp"

namespace fbnll {

/// Histogram-of-oriented-gradients configuration. Defaults give a 324-dim
/// descriptor on 32x32 images: 4x4 grid of 8x8 cells, 2x2-cell blocks at
/// stride 1 (3x3 blocks), 9 unsigned orientation bins.
struct HogConfig {
    int width = 32;
    int height = 32;
    int cell_size = 8;
    int block_size = 2;  // in cells
    int bins = 9;
    double epsilon = 1e-6;  // block L2 normalization floor

    int cells_x() const { return width / cell_size; }
    int cells_y() const { return height / cell_size; }
    int blocks_x() const { return cells_x() - block_size + 1; }
    int blocks_y() const { return cells_y() - block_size + 1; }
    int descriptor_dim() const {
        return blocks_x() * blocks_y() * block_size * block_size * bins;
    }

    void validate() const {
        if (width <= 0 || height <= 0 || cell_size <= 0 || block_size <= 0 || bins <= 0)
            throw ConfigError("hog parameters must be positive");
        if (width % cell_size != 0 || height % cell_size != 0)
            throw ConfigError("image size must be a multiple of the cell size");
        if (block_size > cells_x() || block_size > cells_y())
            throw ConfigError("block size exceeds the cell grid");
        if (epsilon <= 0.0) throw ConfigError("hog epsilon must be positive");
    }
};

namespace detail {

/// Accepts either a grayscale row (w*h values) or planar RGB (3*w*h: R then G
/// then B plane), converting with the usual luma weights.
inline std::vector<double> to_grayscale(const Eigen::Ref<const Eigen::RowVectorXf>& row,
                                        const HogConfig& cfg) {
    const int pixels = cfg.width * cfg.height;
    std::vector<double> gray(static_cast<std::size_t>(pixels));
    if (row.size() == pixels) {
        for (int i = 0; i < pixels; ++i) gray[static_cast<std::size_t>(i)] = row[i];
    } else if (row.size() == 3 * pixels) {
        for (int i = 0; i < pixels; ++i)
            gray[static_cast<std::size_t>(i)] =
                0.299 * row[i] + 0.587 * row[pixels + i] + 0.114 * row[2 * pixels + i];
    } else {
        throw ShapeError("hog input has " + std::to_string(row.size()) +
                         " values, expected " + std::to_string(pixels) + " or " +
                         std::to_string(3 * pixels));
    }
    return gray;
}

}  // namespace detail

/// Descriptor for one image row. Centered-difference gradients with replicate
/// borders; gradient magnitudes vote into hard orientation bins over
/// [0, 180); blocks are L2-normalized as v / sqrt(|v|^2 + eps^2), so a
/// constant image yields the all-zero descriptor.
inline Eigen::VectorXf hog_descriptor(const Eigen::Ref<const Eigen::RowVectorXf>& row,
                                      const HogConfig& cfg) {
    const std::vector<double> gray = detail::to_grayscale(row, cfg);
    const int w = cfg.width, h = cfg.height;
    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return gray[static_cast<std::size_t>(y * w + x)];
    };

    const int cx = cfg.cells_x(), cy = cfg.cells_y();
    Eigen::MatrixXd cell_hist = Eigen::MatrixXd::Zero(cy * cx, cfg.bins);
    const double bin_width = 180.0 / cfg.bins;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = at(x + 1, y) - at(x - 1, y);
            const double gy = at(x, y + 1) - at(x, y - 1);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) * 180.0 / M_PI;  // (-180, 180]
            if (angle < 0.0) angle += 180.0;                   // unsigned orientation
            if (angle >= 180.0) angle -= 180.0;
            int bin = static_cast<int>(angle / bin_width);
            if (bin >= cfg.bins) bin = cfg.bins - 1;
            const int cell = (y / cfg.cell_size) * cx + (x / cfg.cell_size);
            cell_hist(cell, bin) += mag;
        }
    }

    Eigen::VectorXf out(cfg.descriptor_dim());
    int pos = 0;
    const int cells_per_block = cfg.block_size * cfg.block_size;
    Eigen::VectorXd block(cells_per_block * cfg.bins);
    for (int by = 0; by < cfg.blocks_y(); ++by) {
        for (int bx = 0; bx < cfg.blocks_x(); ++bx) {
            int bpos = 0;
            for (int dy = 0; dy < cfg.block_size; ++dy)
                for (int dx = 0; dx < cfg.block_size; ++dx) {
                    const int cell = (by + dy) * cx + (bx + dx);
                    block.segment(bpos, cfg.bins) = cell_hist.row(cell).transpose();
                    bpos += cfg.bins;
                }
            const double norm = std::sqrt(block.squaredNorm() + cfg.epsilon * cfg.epsilon);
            for (int i = 0; i < block.size(); ++i)
                out[pos++] = static_cast<float>(block[i] / norm);
        }
    }
    return out;
}

}  // namespace fbnll
