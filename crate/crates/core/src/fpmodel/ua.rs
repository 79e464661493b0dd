//! Substring rules splitting user agents into the browser families the
//! evaluation cares about.

use super::{BrowserFamily, OsFamily};

/// `Firefox/` without `Seamonkey` (any case) is Firefox; `Chrome/` without any of
/// `Chromium`, `Edge`, `OPR` is Chrome; everything else is Other.
pub fn classify_browser(ua: &str) -> BrowserFamily {
    if ua.contains("Firefox/") && !ua.to_ascii_lowercase().contains("seamonkey") {
        BrowserFamily::Firefox
    } else if ua.contains("Chrome/") && !["Chromium", "Edge", "OPR"].iter().any(|t| ua.contains(t)) {
        BrowserFamily::Chrome
    } else {
        BrowserFamily::Other
    }
}

/// Desktop OS family. Mobile platforms (Android, iOS) map to Other even
/// though their user agents mention Linux or Mac OS X.
pub fn classify_os(ua: &str) -> OsFamily {
    const MOBILE: [&str; 5] = ["Android", "iPhone", "iPad", "iPod", "Mobile"];
    if MOBILE.iter().any(|t| ua.contains(t)) {
        OsFamily::Other
    } else if ua.contains("Windows") {
        OsFamily::Windows
    } else if ua.contains("Macintosh") || ua.contains("Mac OS X") {
        OsFamily::Mac
    } else if ua.contains("Linux") || ua.contains("X11") {
        OsFamily::Linux
    } else {
        OsFamily::Other
    }
}
