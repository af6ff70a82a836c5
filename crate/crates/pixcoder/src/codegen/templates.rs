//! Built-in template sets. Every union-alphabet token has one entry per
//! target so any grammar-valid tree compiles on any target.

use std::collections::BTreeMap;

use super::{Target, TargetTemplateSet, TokenTemplate};

fn entry(tokens: &mut BTreeMap<String, TokenTemplate>, token: &str, open: &str, close: &str) {
    tokens.insert(
        token.to_string(),
        TokenTemplate {
            open: open.to_string(),
            close: close.to_string(),
        },
    );
}

/// The shipped template set for a target.
pub fn builtin_templates(target: Target) -> TargetTemplateSet {
    match target {
        Target::Html => html(),
        Target::AndroidXml => android_xml(),
        Target::IosStoryboard => ios_storyboard(),
    }
}

fn html() -> TargetTemplateSet {
    let preamble = "\
<!DOCTYPE html>
<html>
<head>
<meta charset=\"utf-8\"/>
<title>Generated Layout</title>
<style>
.container { padding: 16px; font-family: sans-serif; }
.row { display: flex; gap: 12px; margin-bottom: 12px; }
.footer { display: flex; gap: 12px; border-top: 1px solid #ccc; padding-top: 12px; }
</style>
</head>
<body>
";
    let postamble = "</body>\n</html>\n";
    let mut tokens = BTreeMap::new();
    entry(&mut tokens, "body", "<div class=\"container\">\n", "</div>\n");
    entry(&mut tokens, "stack", "<div class=\"stack\">\n", "</div>\n");
    entry(&mut tokens, "row", "<div class=\"row\">\n", "</div>\n");
    entry(&mut tokens, "footer", "<div class=\"footer\">\n", "</div>\n");
    entry(&mut tokens, "title", "<h2 class=\"title\">Title</h2>\n", "");
    entry(&mut tokens, "text", "<p class=\"text\">Lorem ipsum dolor sit amet.</p>\n", "");
    entry(&mut tokens, "btn", "<button class=\"btn\">Button</button>\n", "");
    entry(&mut tokens, "img", "<img class=\"thumb\" src=\"placeholder.png\" alt=\"\"/>\n", "");
    entry(&mut tokens, "label", "<span class=\"label\">Label</span>\n", "");
    entry(&mut tokens, "switch", "<input class=\"switch\" type=\"checkbox\"/>\n", "");
    entry(&mut tokens, "slider", "<input class=\"slider\" type=\"range\"/>\n", "");
    entry(&mut tokens, "check", "<input class=\"check\" type=\"checkbox\"/>\n", "");
    entry(&mut tokens, "rating", "<span class=\"rating\">&#9733;&#9733;&#9733;&#9734;</span>\n", "");
    entry(&mut tokens, "link-home", "<a class=\"nav-link\" href=\"#home\">Home</a>\n", "");
    entry(&mut tokens, "link-about", "<a class=\"nav-link\" href=\"#about\">About</a>\n", "");
    entry(&mut tokens, "link-contact", "<a class=\"nav-link\" href=\"#contact\">Contact</a>\n", "");
    entry(&mut tokens, "btn-home", "<button class=\"footer-btn\">Home</button>\n", "");
    entry(&mut tokens, "btn-search", "<button class=\"footer-btn\">Search</button>\n", "");
    entry(&mut tokens, "btn-contact", "<button class=\"footer-btn\">Contact</button>\n", "");
    entry(&mut tokens, "btn-download", "<button class=\"footer-btn\">Download</button>\n", "");
    entry(&mut tokens, "tab-home", "<button class=\"tab\">Home</button>\n", "");
    entry(&mut tokens, "tab-search", "<button class=\"tab\">Search</button>\n", "");
    entry(&mut tokens, "tab-profile", "<button class=\"tab\">Profile</button>\n", "");
    entry(&mut tokens, "tab-settings", "<button class=\"tab\">Settings</button>\n", "");
    TargetTemplateSet {
        target: Target::Html.name().to_string(),
        preamble: preamble.to_string(),
        postamble: postamble.to_string(),
        tokens,
    }
}

fn android_xml() -> TargetTemplateSet {
    let preamble = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<LinearLayout orientation=\"vertical\">\n";
    let postamble = "</LinearLayout>\n";
    let mut tokens = BTreeMap::new();
    entry(&mut tokens, "body", "<FrameLayout id=\"body\">\n", "</FrameLayout>\n");
    entry(&mut tokens, "stack", "<LinearLayout id=\"stack\" orientation=\"vertical\">\n", "</LinearLayout>\n");
    entry(&mut tokens, "row", "<LinearLayout orientation=\"horizontal\">\n", "</LinearLayout>\n");
    entry(&mut tokens, "footer", "<LinearLayout id=\"footer\" orientation=\"horizontal\">\n", "</LinearLayout>\n");
    entry(&mut tokens, "title", "<TextView style=\"title\" text=\"Title\"/>\n", "");
    entry(&mut tokens, "text", "<TextView text=\"Lorem ipsum\"/>\n", "");
    entry(&mut tokens, "btn", "<Button text=\"Button\"/>\n", "");
    entry(&mut tokens, "img", "<ImageView src=\"placeholder\"/>\n", "");
    entry(&mut tokens, "label", "<TextView text=\"Label\"/>\n", "");
    entry(&mut tokens, "switch", "<Switch/>\n", "");
    entry(&mut tokens, "slider", "<SeekBar/>\n", "");
    entry(&mut tokens, "check", "<CheckBox/>\n", "");
    entry(&mut tokens, "rating", "<RatingBar numStars=\"4\"/>\n", "");
    entry(&mut tokens, "link-home", "<Button style=\"link\" text=\"Home\"/>\n", "");
    entry(&mut tokens, "link-about", "<Button style=\"link\" text=\"About\"/>\n", "");
    entry(&mut tokens, "link-contact", "<Button style=\"link\" text=\"Contact\"/>\n", "");
    entry(&mut tokens, "btn-home", "<Button text=\"Home\"/>\n", "");
    entry(&mut tokens, "btn-search", "<Button text=\"Search\"/>\n", "");
    entry(&mut tokens, "btn-contact", "<Button text=\"Contact\"/>\n", "");
    entry(&mut tokens, "btn-download", "<Button text=\"Download\"/>\n", "");
    entry(&mut tokens, "tab-home", "<Button style=\"tab\" text=\"Home\"/>\n", "");
    entry(&mut tokens, "tab-search", "<Button style=\"tab\" text=\"Search\"/>\n", "");
    entry(&mut tokens, "tab-profile", "<Button style=\"tab\" text=\"Profile\"/>\n", "");
    entry(&mut tokens, "tab-settings", "<Button style=\"tab\" text=\"Settings\"/>\n", "");
    TargetTemplateSet {
        target: Target::AndroidXml.name().to_string(),
        preamble: preamble.to_string(),
        postamble: postamble.to_string(),
        tokens,
    }
}

fn ios_storyboard() -> TargetTemplateSet {
    let preamble = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<document type=\"layout-stub\">\n<scene>\n";
    let postamble = "</scene>\n</document>\n";
    let mut tokens = BTreeMap::new();
    entry(&mut tokens, "body", "<view id=\"body\">\n", "</view>\n");
    entry(&mut tokens, "stack", "<stackView axis=\"vertical\">\n<subviews>\n", "</subviews>\n</stackView>\n");
    entry(&mut tokens, "row", "<stackView axis=\"horizontal\">\n<subviews>\n", "</subviews>\n</stackView>\n");
    entry(&mut tokens, "footer", "<view id=\"footer\">\n", "</view>\n");
    entry(&mut tokens, "title", "<label style=\"title\" text=\"Title\"/>\n", "");
    entry(&mut tokens, "text", "<label text=\"Lorem ipsum\"/>\n", "");
    entry(&mut tokens, "btn", "<button title=\"Button\"/>\n", "");
    entry(&mut tokens, "img", "<imageView image=\"placeholder\"/>\n", "");
    entry(&mut tokens, "label", "<label text=\"Label\"/>\n", "");
    entry(&mut tokens, "switch", "<switch/>\n", "");
    entry(&mut tokens, "slider", "<slider/>\n", "");
    entry(&mut tokens, "check", "<button type=\"checkbox\"/>\n", "");
    entry(&mut tokens, "rating", "<view kind=\"rating\"/>\n", "");
    entry(&mut tokens, "link-home", "<button style=\"link\" title=\"Home\"/>\n", "");
    entry(&mut tokens, "link-about", "<button style=\"link\" title=\"About\"/>\n", "");
    entry(&mut tokens, "link-contact", "<button style=\"link\" title=\"Contact\"/>\n", "");
    entry(&mut tokens, "btn-home", "<button title=\"Home\"/>\n", "");
    entry(&mut tokens, "btn-search", "<button title=\"Search\"/>\n", "");
    entry(&mut tokens, "btn-contact", "<button title=\"Contact\"/>\n", "");
    entry(&mut tokens, "btn-download", "<button title=\"Download\"/>\n", "");
    entry(&mut tokens, "tab-home", "<button style=\"tab\" title=\"Home\"/>\n", "");
    entry(&mut tokens, "tab-search", "<button style=\"tab\" title=\"Search\"/>\n", "");
    entry(&mut tokens, "tab-profile", "<button style=\"tab\" title=\"Profile\"/>\n", "");
    entry(&mut tokens, "tab-settings", "<button style=\"tab\" title=\"Settings\"/>\n", "");
    TargetTemplateSet {
        target: Target::IosStoryboard.name().to_string(),
        preamble: preamble.to_string(),
        postamble: postamble.to_string(),
        tokens,
    }
}
