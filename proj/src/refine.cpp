#include "tqa/refine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace tqa {

using nlohmann::json;

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace

std::vector<Paragraph> split_paragraphs(const std::string& article, const std::string& article_id,
                                        int words_per_paragraph) {
    if (words_per_paragraph < 1) throw std::invalid_argument("paragraph size must be >= 1");
    std::vector<std::string> tokens = whitespace_tokens(article);
    std::vector<Paragraph> out;
    int ordinal = 0;
    for (std::size_t pos = 0; pos < tokens.size(); pos += static_cast<std::size_t>(words_per_paragraph)) {
        std::size_t n = std::min(tokens.size() - pos, static_cast<std::size_t>(words_per_paragraph));
        std::string text;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) text += ' ';
            text += tokens[pos + i];
        }
        out.push_back(Paragraph{{article_id, ordinal++}, std::move(text), static_cast<int>(n)});
    }
    return out;
}

std::vector<std::string> scorer_tokens(const std::string& text) {
    std::vector<std::string> out;
    for (std::string tok : whitespace_tokens(text)) {
        std::size_t b = 0, e = tok.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
        if (b == e) continue;
        std::string t = tok.substr(b, e - b);
        for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(t));
    }
    return out;
}

TfIdfScorer::TfIdfScorer(const std::vector<std::string>& corpus) {
    std::map<std::string, std::size_t> df;
    for (const std::string& doc : corpus) {
        std::vector<std::string> tokens = scorer_tokens(doc);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (const std::string& t : tokens) ++df[t];
    }
    vocab_.reserve(df.size());
    idf_.reserve(df.size());
    double n = static_cast<double>(corpus.size());
    for (const auto& [term, d] : df) {
        vocab_.push_back(term);
        // Smoothed idf, always positive, so equal texts never zero out.
        idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0);
    }
}

std::vector<double> TfIdfScorer::embed(const std::string& text) {
    std::vector<double> v(vocab_.size(), 0.0);
    for (const std::string& t : scorer_tokens(text)) {
        auto it = std::lower_bound(vocab_.begin(), vocab_.end(), t);
        if (it != vocab_.end() && *it == t)
            v[static_cast<std::size_t>(it - vocab_.begin())] += idf_[static_cast<std::size_t>(it - vocab_.begin())];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

RemoteScorer::RemoteScorer(const std::string& endpoint) {
    // Accepts "http://host:port/path"; the path defaults to /embed.
    std::size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos)
        throw std::invalid_argument("scorer endpoint must include a scheme: " + endpoint);
    std::size_t slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) {
        base_ = endpoint;
        path_ = "/embed";
    } else {
        base_ = endpoint.substr(0, slash);
        path_ = endpoint.substr(slash);
    }
}

std::vector<double> RemoteScorer::embed(const std::string& text) {
    return embed_batch({text}).front();
}

std::vector<std::vector<double>> RemoteScorer::embed_batch(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    httplib::Client client(base_);
    client.set_read_timeout(60, 0);
    for (std::size_t pos = 0; pos < texts.size(); pos += kBatchSize) {
        std::size_t n = std::min(kBatchSize, texts.size() - pos);
        json req{{"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(pos),
                                                    texts.begin() + static_cast<std::ptrdiff_t>(pos + n))}};
        httplib::Result res = client.Post(path_, req.dump(), "application/json");
        if (!res)
            throw std::runtime_error("embedding service unreachable at " + base_ + path_);
        if (res->status < 200 || res->status >= 300)
            throw std::runtime_error("embedding service returned status " +
                                     std::to_string(res->status) + " at " + base_ + path_);
        json body = json::parse(res->body);
        const json& vectors = body.at("vectors");
        if (!vectors.is_array() || vectors.size() != n)
            throw std::runtime_error("embedding service returned " + std::to_string(vectors.size()) +
                                     " vectors for " + std::to_string(n) + " texts");
        for (const json& v : vectors) {
            std::vector<double> vec = v.get<std::vector<double>>();
            if (dimension_ == 0) dimension_ = vec.size();
            if (vec.size() != dimension_)
                throw std::runtime_error("embedding service returned inconsistent dimensions");
            out.push_back(std::move(vec));
        }
    }
    return out;
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace

std::vector<ScoredParagraph> score_paragraphs(const std::string& question,
                                              const std::vector<Paragraph>& paragraphs,
                                              RelevanceScorer& scorer) {
    std::vector<ScoredParagraph> out;
    out.reserve(paragraphs.size());
    try {
        std::vector<double> qv = scorer.embed(question);
        std::vector<std::string> texts;
        texts.reserve(paragraphs.size());
        for (const Paragraph& p : paragraphs) texts.push_back(p.text);
        std::vector<std::vector<double>> vectors = scorer.embed_batch(texts);
        for (std::size_t i = 0; i < paragraphs.size(); ++i)
            out.push_back(ScoredParagraph{paragraphs[i], cosine(qv, vectors[i])});
    } catch (const std::exception& e) {
        std::string range = paragraphs.empty()
                                ? std::string("(no paragraphs)")
                                : paragraphs.front().id.article + "#" +
                                      std::to_string(paragraphs.front().id.ordinal) + ".." +
                                      paragraphs.back().id.article + "#" +
                                      std::to_string(paragraphs.back().id.ordinal);
        throw std::runtime_error("scoring paragraphs " + range + ": " + e.what());
    }
    return out;
}

std::unique_ptr<RelevanceScorer> LexicalScorerProvider::make(const std::vector<Paragraph>& corpus) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const Paragraph& p : corpus) texts.push_back(p.text);
    return std::make_unique<TfIdfScorer>(texts);
}

std::unique_ptr<RelevanceScorer> RemoteScorerProvider::make(const std::vector<Paragraph>&) {
    return std::make_unique<RemoteScorer>(endpoint_);
}

std::vector<ScoredParagraph> refine_context(const std::string& question,
                                            const std::vector<std::pair<std::string, std::string>>& articles,
                                            const RefinementConfig& cfg, ScorerProvider& provider) {
    if (cfg.k < 1) throw std::invalid_argument("refinement k must be >= 1");
    std::vector<Paragraph> paragraphs;
    for (const auto& [id, text] : articles) {
        std::vector<Paragraph> chunk = split_paragraphs(text, id);
        paragraphs.insert(paragraphs.end(), chunk.begin(), chunk.end());
    }
    std::unique_ptr<RelevanceScorer> scorer = provider.make(paragraphs);
    std::vector<ScoredParagraph> scored = score_paragraphs(question, paragraphs, *scorer);
    std::sort(scored.begin(), scored.end(), [](const ScoredParagraph& a, const ScoredParagraph& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.paragraph.id.article != b.paragraph.id.article)
            return a.paragraph.id.article < b.paragraph.id.article;
        return a.paragraph.id.ordinal < b.paragraph.id.ordinal;
    });
    if (scored.size() > static_cast<std::size_t>(cfg.k)) scored.resize(static_cast<std::size_t>(cfg.k));
    return scored;
}

FileSearchProvider::FileSearchProvider(const std::string& manifest_path,
                                       const std::string& corpus_dir)
    : corpus_dir_(corpus_dir) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open corpus manifest " + manifest_path);
    json j;
    in >> j;
    if (!j.is_object()) throw std::runtime_error("corpus manifest must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        entries_.emplace_back(it.key(), it.value().get<std::vector<std::string>>());
}

std::vector<ArticleRef> FileSearchProvider::search(const std::string& question_id, int top_n) {
    for (const auto& [id, files] : entries_) {
        if (id != question_id) continue;
        std::vector<ArticleRef> refs;
        for (const std::string& f : files) {
            if (top_n >= 0 && refs.size() >= static_cast<std::size_t>(top_n)) break;
            refs.push_back(ArticleRef{f, corpus_dir_ + "/" + f});
        }
        return refs;
    }
    return {};
}

}  // namespace tqa
