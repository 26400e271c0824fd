#include "roadkit/imageops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace roadkit {

namespace {

void require_same_shape(int iw, int ih, int mw, int mh, const char* op) {
    if (iw != mw || ih != mh) {
        throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                    std::to_string(iw) + "x" + std::to_string(ih) + " vs " +
                                    std::to_string(mw) + "x" + std::to_string(mh) + ")");
    }
}

}  // namespace

ImageTensor::ImageTensor(int w, int h) : height(h), width(w) {
    if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(w) * h * channels, 0);
}

ConfidenceMap::ConfidenceMap(int w, int h) : height(h), width(w) {
    if (w < 1 || h < 1) throw std::invalid_argument("confidence map dimensions must be >= 1");
    values.assign(static_cast<std::size_t>(w) * h, 0.0f);
}

CloudDecision cloud_filter(const ImageTensor& img, double threshold) {
    CloudDecision d;
    const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
    std::array<std::uint64_t, 3> sums{};
    for (std::size_t i = 0; i < pixels; ++i) {
        sums[0] += img.data[i * 3 + 0];
        sums[1] += img.data[i * 3 + 1];
        sums[2] += img.data[i * 3 + 2];
    }
    for (int c = 0; c < 3; ++c) {
        d.band_means[c] = static_cast<double>(sums[c]) / static_cast<double>(pixels);
    }
    d.keep = !(d.band_means[0] > threshold && d.band_means[1] > threshold &&
               d.band_means[2] > threshold);
    return d;
}

ImageTensor occlude(const ImageTensor& img, const BinaryMask& mask, OcclusionMode mode) {
    require_same_shape(img.width, img.height, mask.width, mask.height, "occlude");
    ImageTensor out(img.width, img.height);
    const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < pixels; ++i) {
        const bool visible = (mode == OcclusionMode::context_occluded) ? mask.values[i] != 0
                                                                       : mask.values[i] == 0;
        if (visible) {
            out.data[i * 3 + 0] = img.data[i * 3 + 0];
            out.data[i * 3 + 1] = img.data[i * 3 + 1];
            out.data[i * 3 + 2] = img.data[i * 3 + 2];
        }
    }
    return out;
}

ImageTensor replace_channel(const ImageTensor& img, const BinaryMask& mask, Channel channel) {
    require_same_shape(img.width, img.height, mask.width, mask.height, "replace_channel");
    ImageTensor out = img;
    const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
    const int c = static_cast<int>(channel);
    for (std::size_t i = 0; i < pixels; ++i) {
        out.data[i * 3 + c] = mask.values[i] ? 255 : 0;
    }
    return out;
}

ImageTensor crop_center(const ImageTensor& img, int target) {
    const CropRect rx = center_crop_rect(img.width, target);
    const CropRect ry = center_crop_rect(img.height, target);
    ImageTensor out(target, target);
    for (int y = 0; y < target; ++y) {
        for (int x = 0; x < target; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.set(x, y, c, img.at(rx.x0 + x, ry.y0 + y, c));
            }
        }
    }
    return out;
}

BinaryMask crop_center(const BinaryMask& mask, int target) {
    const CropRect rx = center_crop_rect(mask.width, target);
    const CropRect ry = center_crop_rect(mask.height, target);
    BinaryMask out(target, target);
    for (int y = 0; y < target; ++y) {
        for (int x = 0; x < target; ++x) {
            out.set(x, y, mask.at(rx.x0 + x, ry.y0 + y));
        }
    }
    return out;
}

ImageTensor downsize_box(const ImageTensor& img, int factor) {
    if (factor < 1) throw std::invalid_argument("downsize_box: factor must be >= 1");
    if (img.width % factor != 0 || img.height % factor != 0) {
        throw std::invalid_argument("downsize_box: factor " + std::to_string(factor) +
                                    " does not divide " + std::to_string(img.width) + "x" +
                                    std::to_string(img.height));
    }
    if (factor == 1) return img;
    const int ow = img.width / factor;
    const int oh = img.height / factor;
    const std::uint32_t block = static_cast<std::uint32_t>(factor) * factor;
    ImageTensor out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int c = 0; c < 3; ++c) {
                std::uint32_t sum = 0;
                for (int by = 0; by < factor; ++by) {
                    for (int bx = 0; bx < factor; ++bx) {
                        sum += img.at(x * factor + bx, y * factor + by, c);
                    }
                }
                // round-half-up of sum/block
                out.set(x, y, c, static_cast<std::uint8_t>((2 * sum + block) / (2 * block)));
            }
        }
    }
    return out;
}

BinaryMask downsize_majority(const BinaryMask& mask, int factor) {
    if (factor < 1) throw std::invalid_argument("downsize_majority: factor must be >= 1");
    if (mask.width % factor != 0 || mask.height % factor != 0) {
        throw std::invalid_argument("downsize_majority: factor does not divide mask dimensions");
    }
    if (factor == 1) return mask;
    const int ow = mask.width / factor;
    const int oh = mask.height / factor;
    const std::uint32_t block = static_cast<std::uint32_t>(factor) * factor;
    BinaryMask out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            std::uint32_t sum = 0;
            for (int by = 0; by < factor; ++by) {
                for (int bx = 0; bx < factor; ++bx) {
                    sum += mask.at(x * factor + bx, y * factor + by);
                }
            }
            out.set(x, y, 2 * sum >= block ? 1 : 0);
        }
    }
    return out;
}

namespace {

// clockwise quarter turn maps (x, y) -> (size-1-y, x)
int normalize_turns(int quarter_turns) {
    int k = quarter_turns % 4;
    if (k < 0) k += 4;
    return k;
}

}  // namespace

ImageTensor rotate90(const ImageTensor& img, int quarter_turns) {
    if (img.width != img.height) throw std::invalid_argument("rotate90: input must be square");
    int k = normalize_turns(quarter_turns);
    ImageTensor cur = img;
    while (k-- > 0) {
        ImageTensor next(cur.width, cur.height);
        for (int y = 0; y < cur.height; ++y) {
            for (int x = 0; x < cur.width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    next.set(cur.height - 1 - y, x, c, cur.at(x, y, c));
                }
            }
        }
        cur = std::move(next);
    }
    return cur;
}

BinaryMask rotate90(const BinaryMask& mask, int quarter_turns) {
    if (mask.width != mask.height) throw std::invalid_argument("rotate90: input must be square");
    int k = normalize_turns(quarter_turns);
    BinaryMask cur = mask;
    while (k-- > 0) {
        BinaryMask next(cur.width, cur.height);
        for (int y = 0; y < cur.height; ++y) {
            for (int x = 0; x < cur.width; ++x) {
                next.set(cur.height - 1 - y, x, cur.at(x, y));
            }
        }
        cur = std::move(next);
    }
    return cur;
}

BinaryMask binarize_confidence(const ConfidenceMap& c, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("binarize_confidence: threshold must be in [0, 1]");
    }
    BinaryMask out(c.width, c.height);
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        out.values[i] = (static_cast<double>(c.values[i]) >= threshold) ? 1 : 0;
    }
    return out;
}

}  // namespace roadkit
