#include "picl/prompt.hpp"

#include "picl/common.hpp"

namespace picl {

namespace {

void append_line(std::string& out, const task_record& r, task_category category,
                 const std::string* verbalizer, bool trailing_space) {
    out += "Input: ";
    out += r.text;
    if (category == task_category::aspect) {
        out += ", Aspect: ";
        out += r.aspect;
    } else if (category == task_category::pair) {
        out += ", Text 2: ";
        out += r.text2;
    }
    out += ", Label:";
    if (verbalizer) {
        out += ' ';
        out += *verbalizer;
    } else if (trailing_space) {
        out += ' ';
    }
}

prompt_string render(std::span<const task_record> demos, const task_record& query,
                     std::span<const std::string> verbalizers, task_category category,
                     const prompt_options& opts) {
    for (const task_record& d : demos)
        if (d.label < 0 || static_cast<std::size_t>(d.label) >= verbalizers.size())
            throw data_error("demonstration label out of range");

    prompt_string p;
    p.category = category;
    for (const task_record& d : demos) {
        append_line(p.text, d, category, &verbalizers[static_cast<std::size_t>(d.label)],
                    opts.trailing_space);
        p.text += '\n';
    }
    append_line(p.text, query, category, nullptr, opts.trailing_space);
    return p;
}

}  // namespace

prompt_string build_prompt(std::span<const task_record> demos, const task_record& query,
                           std::span<const std::string> verbalizers, task_category category,
                           const prompt_options& opts) {
    return render(demos, query, verbalizers, category, opts);
}

prompt_string build_queryless_prompt(std::span<const task_record> demos,
                                     std::span<const std::string> verbalizers,
                                     task_category category, const prompt_options& opts) {
    if (demos.empty())
        throw config_error("a query-less prompt needs at least one demonstration");
    return render(demos, task_record{}, verbalizers, category, opts);
}

}  // namespace picl
